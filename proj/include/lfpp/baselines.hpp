#pragma once

#include "lfpp/core.hpp"
#include "lfpp/spectral.hpp"

namespace lfpp {

/// Per-code occurrence counts over [0, T].
Vec count_embedding(const EventSequence& seq);

/// Per-patient PMI matrix over time-binned binary co-occurrence:
/// [0, T] is split into ceil(T/window) half-open bins (final partial bin
/// kept), p(j) and p(j, j') are the fractions of bins where code j
/// (respectively both codes) occur at least once, and
///   PMI_{jj'} = log((p(j,j') + eps) / ((p(j) + eps)(p(j') + eps)))
/// with additive smoothing eps = 1/bins. Symmetric by construction.
Mat pmi_matrix(const EventSequence& seq, double window);

/// Top-k algebraic eigenvalues of the PMI matrix, descending.
Embedding pmi_embedding(const EventSequence& seq, double window, int k);

}  // namespace lfpp
