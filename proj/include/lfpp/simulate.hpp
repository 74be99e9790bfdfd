#pragma once

#include "lfpp/core.hpp"
#include "lfpp/rng.hpp"

#include <cstdint>
#include <vector>

namespace lfpp {

/// Recipe for simulating one cohort.
struct SimulationPlan {
    ModelSpec model;
    int n = 1;
    /// Common T (size 1) or one T per patient (size n); all > 0.
    std::vector<double> observation_times;
    std::uint64_t seed = 0;
    /// Assign groups in exact proportion to the prior instead of sampling.
    bool stratified = false;

    double observation_time(int i) const;
    void validate() const;
};

/// Draw a group index from the prior.
int sample_group(const Vec& prior, RandomSource& rng);

/// Homogeneous Poisson process on [0, T]: component l has rate mu_l.
EventSequence sample_latent(const Vec& mu, double T, RandomSource& rng);

/// lambda_j(t) = nu_j + sum_l sum_{u in M_l, u < t} omega_{jl}(t - u).
/// Only latent events strictly before t count; events with t - u beyond
/// the transfer support are skipped via a sorted-window scan.
double conditional_intensity(const ModelSpec& model, const EventSequence& latent,
                             int j, double t);

/// Thinning simulation of the observed process conditional on a latent
/// realization: candidates are drawn at a piecewise-constant dominating
/// rate lambda_bar_j = nu_j + (max_l a_{jl} * sup beta) * #(latent events in
/// the trailing support window) and accepted with probability
/// lambda_j(t) / lambda_bar_j. Throws if an acceptance ratio exceeds
/// 1 + 1e-9, which would mean the dominating bound is broken.
EventSequence simulate_observed(const ModelSpec& model, const EventSequence& latent,
                                double T, RandomSource& rng);

/// Group sizes under exact stratification (largest-remainder rounding of
/// n * prior).
std::vector<int> stratified_group_sizes(const Vec& prior, int n);

/// One stationary-regime patient: the latent process is simulated on a
/// window extended by the transfer support (burn-in), and observed events
/// before time 0 are discarded, so the returned sequence on [0, T] is
/// stationary.
EventSequence simulate_stationary(const ModelSpec& model, int group_index,
                                  double T, RandomSource& rng);

/// Simulate a labeled cohort. Patient i uses rng stream i of plan.seed, so
/// output is bit-identical across runs and thread schedules.
Dataset simulate_cohort(const SimulationPlan& plan);

}  // namespace lfpp
