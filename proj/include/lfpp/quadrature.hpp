#pragma once

#include <cmath>
#include <utility>

namespace lfpp {

namespace detail {

template <typename F>
double adaptive_simpson_step(const F& f, double a, double b, double fa, double fm,
                             double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
template <typename F>
double integrate_adaptive(const F& f, double a, double b, double tol = 1e-9,
                          int max_depth = 48) {
    if (!(b > a)) return 0.0;
    // Seed with a few panels so narrow features are not missed.
    const int panels = 8;
    const double step = (b - a) / panels;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double x0 = a + i * step;
        const double x1 = (i + 1 == panels) ? b : x0 + step;
        const double xm = 0.5 * (x0 + x1);
        const double f0 = f(x0), fm = f(xm), f1 = f(x1);
        const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        total += detail::adaptive_simpson_step(f, x0, x1, f0, fm, f1, whole,
                                               tol / panels, max_depth);
    }
    return total;
}

}  // namespace lfpp
