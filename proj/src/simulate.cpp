#include "lfpp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lfpp {

double SimulationPlan::observation_time(int i) const {
    return observation_times.size() == 1 ? observation_times.front()
                                         : observation_times.at(i);
}

void SimulationPlan::validate() const {
    model.validate();
    if (n < 1) throw std::invalid_argument("SimulationPlan: n must be >= 1");
    if (observation_times.size() != 1 &&
        observation_times.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument(
            "SimulationPlan: observation_times must have length 1 or n");
    }
    for (double t : observation_times) {
        if (!(t > 0.0)) {
            throw std::invalid_argument(
                "SimulationPlan: observation times must be > 0");
        }
    }
}

int sample_group(const Vec& prior, RandomSource& rng) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (Eigen::Index g = 0; g < prior.size(); ++g) {
        cumulative += prior[g];
        if (u < cumulative) return static_cast<int>(g);
    }
    return static_cast<int>(prior.size() - 1);
}

EventSequence sample_latent(const Vec& mu, double T, RandomSource& rng) {
    std::vector<std::vector<double>> events(mu.size());
    for (Eigen::Index l = 0; l < mu.size(); ++l) {
        const double rate = mu[l];
        if (rate <= 0.0) continue;
        double t = rng.exponential(rate);
        while (t <= T) {
            events[l].push_back(t);
            t += rng.exponential(rate);
        }
    }
    return EventSequence(std::move(events), T);
}

double conditional_intensity(const ModelSpec& model, const EventSequence& latent,
                             int j, double t) {
    const TransferBank& transfer = model.transfer;
    const double b0 = transfer.support_radius();
    double intensity = model.baseline[j];
    for (int l = 0; l < latent.dim(); ++l) {
        const double a = transfer.coefficients()(j, l);
        if (a == 0.0) continue;
        const auto& times = latent.component(l);
        // Events with t - u >= b0 contribute exactly 0; strict u < t.
        auto first = std::upper_bound(times.begin(), times.end(), t - b0);
        auto last = std::lower_bound(first, times.end(), t);
        for (auto it = first; it != last; ++it) {
            intensity += a * transfer.beta(t - *it);
        }
    }
    return intensity;
}

namespace {

/// Latent events of all components merged in time order, used for the
/// dominating-rate window count.
std::vector<double> merged_times(const EventSequence& latent) {
    std::vector<double> merged;
    merged.reserve(latent.total_events());
    for (int l = 0; l < latent.dim(); ++l) {
        const auto& times = latent.component(l);
        merged.insert(merged.end(), times.begin(), times.end());
    }
    std::sort(merged.begin(), merged.end());
    return merged;
}

}  // namespace

EventSequence simulate_observed(const ModelSpec& model, const EventSequence& latent,
                                double T, RandomSource& rng) {
    if (latent.window_end() != T) {
        throw std::invalid_argument("simulate_observed: latent.window_end must equal T");
    }
    if (latent.dim() != model.k()) {
        throw std::invalid_argument("simulate_observed: latent dimension must equal k");
    }
    const TransferBank& transfer = model.transfer;
    const double b0 = transfer.support_radius();
    const double sup_beta = transfer.beta_sup();
    const std::vector<double> merged = merged_times(latent);
    const std::size_t n_latent = merged.size();

    std::vector<std::vector<double>> observed(model.d());
    for (int j = 0; j < model.d(); ++j) {
        const double nu = model.baseline[j];
        const double bump = transfer.coefficients().row(j).maxCoeff() * sup_beta;
        double s = 0.0;
        std::size_t lo = 0;  // first merged index with time > s - b0
        std::size_t hi = 0;  // first merged index with time > s
        while (s < T) {
            const double horizon = hi < n_latent ? std::min(merged[hi], T) : T;
            const double dominating = nu + bump * static_cast<double>(hi - lo);
            bool at_horizon = true;
            if (dominating > 0.0) {
                const double gap = rng.exponential(dominating);
                if (s + gap <= horizon) {
                    s += gap;
                    at_horizon = false;
                    const double ratio =
                        conditional_intensity(model, latent, j, s) / dominating;
                    if (ratio > 1.0 + 1e-9) {
                        throw std::runtime_error(
                            "simulate_observed: thinning acceptance ratio " +
                            std::to_string(ratio) + " exceeds 1 (broken bound)");
                    }
                    if (rng.uniform() < ratio) observed[j].push_back(s);
                }
            }
            if (at_horizon) {
                if (horizon >= T) break;
                s = horizon;
                while (hi < n_latent && merged[hi] <= s) ++hi;
            }
            while (lo < hi && merged[lo] <= s - b0) ++lo;
        }
    }
    return EventSequence(std::move(observed), T);
}

std::vector<int> stratified_group_sizes(const Vec& prior, int n) {
    const int g = static_cast<int>(prior.size());
    std::vector<int> sizes(g);
    std::vector<std::pair<double, int>> remainders(g);
    int assigned = 0;
    for (int i = 0; i < g; ++i) {
        const double exact = prior[i] * n;
        sizes[i] = static_cast<int>(std::floor(exact));
        remainders[i] = {exact - sizes[i], i};
        assigned += sizes[i];
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int i = 0; i < n - assigned; ++i) sizes[remainders[i % g].second] += 1;
    return sizes;
}

EventSequence simulate_stationary(const ModelSpec& model, int group_index,
                                  double T, RandomSource& rng) {
    const double b0 = model.transfer.support_radius();
    const double extended = T + b0;
    const EventSequence latent =
        sample_latent(model.groups.at(group_index).mu, extended, rng);
    const EventSequence raw = simulate_observed(model, latent, extended, rng);
    // Map extended time t in [b0, T + b0] back to [0, T]; the discarded
    // head is the burn-in that puts the retained window in steady state.
    std::vector<std::vector<double>> shifted(raw.dim());
    for (int j = 0; j < raw.dim(); ++j) {
        for (double t : raw.component(j)) {
            if (t >= b0) shifted[j].push_back(t - b0);
        }
    }
    return EventSequence(std::move(shifted), T);
}

Dataset simulate_cohort(const SimulationPlan& plan) {
    plan.validate();
    std::vector<int> group_of(plan.n);
    if (plan.stratified) {
        const std::vector<int> sizes = stratified_group_sizes(plan.model.prior, plan.n);
        int next = 0;
        for (std::size_t g = 0; g < sizes.size(); ++g) {
            for (int i = 0; i < sizes[g]; ++i) group_of[next++] = static_cast<int>(g);
        }
    }
    Dataset dataset;
    dataset.records.reserve(plan.n);
    for (int i = 0; i < plan.n; ++i) {
        RandomSource rng = seeded_rng(plan.seed, static_cast<std::uint64_t>(i));
        const int g = plan.stratified ? group_of[i] : sample_group(plan.model.prior, rng);
        EventSequence events =
            simulate_stationary(plan.model, g, plan.observation_time(i), rng);
        dataset.records.push_back(PatientRecord{
            std::to_string(i), std::move(events), plan.model.groups[g].label});
    }
    return dataset;
}

}  // namespace lfpp
