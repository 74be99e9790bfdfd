#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lfpp/core.hpp"
#include "lfpp/quadrature.hpp"
#include "lfpp/rng.hpp"

#include <cmath>
#include <vector>

using namespace lfpp;

TEST_CASE("event sequence validation") {
    EventSequence empty(3, 10.0);
    CHECK(empty.dim() == 3);
    CHECK(empty.total_events() == 0);

    EventSequence ok({{0.5, 1.0, 1.0, 9.0}, {}}, 10.0);
    CHECK(ok.count(0) == 4);
    CHECK(ok.count(1) == 0);

    CHECK_THROWS_AS(EventSequence({{2.0, 1.0}}, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(EventSequence({{-0.1}}, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(EventSequence({{10.5}}, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(EventSequence({{1.0}}, 0.0), std::invalid_argument);
}

TEST_CASE("transfer kernels vanish outside their support") {
    for (TransferKernel tag :
         {TransferKernel::gauss, TransferKernel::sinc_decay, TransferKernel::sqrt_ramp,
          TransferKernel::lin_ramp, TransferKernel::exp4}) {
        TransferBank bank(Mat::Ones(2, 1), tag);
        const double b0 = bank.support_radius();
        CHECK(bank.beta(-1e-12) == 0.0);
        CHECK(bank.beta(-5.0) == 0.0);
        CHECK(bank.beta(b0) == 0.0);
        CHECK(bank.beta(b0 + 3.0) == 0.0);
        CHECK(bank.beta(0.5 * b0) >= 0.0);
        CHECK(to_string(transfer_kernel_from_string(to_string(tag))) == to_string(tag));
    }
}

TEST_CASE("transfer kernel shapes and integrals") {
    TransferBank gauss(Mat::Ones(1, 1), TransferKernel::gauss);
    CHECK(gauss.beta(0.0) == 1.0);
    CHECK(gauss.beta(1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(gauss.support_radius() == 6.0);
    // integral of e^{-t^2/2} over [0, 6] = sqrt(pi/2) erf(6/sqrt(2))
    CHECK(gauss.beta_integral() ==
          doctest::Approx(std::sqrt(M_PI / 2.0) * std::erf(6.0 / std::sqrt(2.0)))
              .epsilon(1e-9));
    CHECK(gauss.beta_sup() == 1.0);

    TransferBank sqrt_ramp(Mat::Ones(1, 1), TransferKernel::sqrt_ramp);
    CHECK(sqrt_ramp.beta_integral() == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

    TransferBank lin_ramp(Mat::Ones(1, 1), TransferKernel::lin_ramp);
    CHECK(lin_ramp.beta_integral() == doctest::Approx(0.5).epsilon(1e-9));

    TransferBank exp4(Mat::Ones(1, 1), TransferKernel::exp4);
    CHECK(exp4.beta_integral() ==
          doctest::Approx((1.0 - std::pow(4.0, -2.0)) / std::log(4.0)).epsilon(1e-9));

    TransferBank sinc(Mat::Ones(1, 1), TransferKernel::sinc_decay);
    CHECK(sinc.beta(0.0) == 0.0);
    // interior maximum of |sin t|/(t+1): t solves tan t = 1 + t
    CHECK(sinc.beta_sup() == doctest::Approx(0.4243).epsilon(1e-3));
    CHECK(sinc.beta_sup() >= sinc.beta(1.1));
    CHECK(sinc.beta_sup() >= sinc.beta(1.2));

    CHECK_THROWS_AS(TransferBank(-Mat::Ones(1, 1), TransferKernel::gauss),
                    std::invalid_argument);
}

TEST_CASE("model spec validation") {
    const auto make = [](Vec prior) {
        return ModelSpec{TransferBank(Mat::Ones(3, 2) * 0.2, TransferKernel::gauss),
                         Vec::Constant(3, 0.1),
                         {Group{"0", Vec::Ones(2)}, Group{"1", Vec::Ones(2) * 2.0}},
                         std::move(prior)};
    };
    CHECK_NOTHROW(make(Vec::Constant(2, 0.5)).validate());

    ModelSpec bad_prior = make((Vec(2) << 0.6, 0.5).finished());
    CHECK_THROWS_AS(bad_prior.validate(), std::invalid_argument);

    ModelSpec zero_mass = make((Vec(2) << 1.0, 0.0).finished());
    CHECK_THROWS_AS(zero_mass.validate(), std::invalid_argument);

    ModelSpec one_group = make(Vec::Constant(2, 0.5));
    one_group.groups.pop_back();
    one_group.prior = Vec::Constant(1, 1.0);
    CHECK_THROWS_AS(one_group.validate(), std::invalid_argument);

    ModelSpec negative_mu = make(Vec::Constant(2, 0.5));
    negative_mu.groups[1].mu[0] = -0.5;
    CHECK_THROWS_AS(negative_mu.validate(), std::invalid_argument);

    // prior within 1e-12 of 1 passes
    ModelSpec close = make((Vec(2) << 0.5 + 4e-13, 0.5 - 8e-13).finished());
    CHECK_NOTHROW(close.validate());
}

TEST_CASE("estimator config grid") {
    EstimatorConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.half_grid_points() == 100);
    const auto grid = cfg.lag_grid();
    CHECK(grid.size() == 201);
    CHECK(grid.front() == doctest::Approx(-5.0));
    CHECK(grid[100] == 0.0);
    CHECK(grid.back() == doctest::Approx(5.0));

    EstimatorConfig bad = cfg;
    bad.lag_grid_step = 0.3;  // does not divide 5 evenly
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("seeded rng determinism and stream separation") {
    RandomSource a = seeded_rng(7, 0);
    RandomSource b = seeded_rng(7, 0);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.uniform() == b.uniform());
    }

    RandomSource c = seeded_rng(7, 0);
    RandomSource d = seeded_rng(7, 1);
    int differing = 0;
    for (int i = 0; i < 100; ++i) {
        differing += c.uniform() != d.uniform();
    }
    CHECK(differing > 90);
}

TEST_CASE("seeded rng uniform moments") {
    RandomSource rng = seeded_rng(7, 0);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += rng.uniform();
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("adaptive quadrature against closed forms") {
    const double gaussian = integrate_adaptive(
        [](double t) { return std::exp(-0.5 * t * t); }, 0.0, 8.0, 1e-10);
    CHECK(gaussian == doctest::Approx(std::sqrt(M_PI / 2.0)).epsilon(1e-10));

    const double poly =
        integrate_adaptive([](double t) { return t * t * t; }, 0.0, 2.0, 1e-10);
    CHECK(poly == doctest::Approx(4.0).epsilon(1e-10));

    // sqrt kink at 0 still converges
    const double kink =
        integrate_adaptive([](double t) { return std::sqrt(t); }, 0.0, 1.0, 1e-9);
    CHECK(kink == doctest::Approx(2.0 / 3.0).epsilon(1e-7));
}
