#pragma once

#include <map>
#include <optional>
#include <string>

#include "ehg/tensor.hpp"
#include "ehg/vb_decomposition.hpp"

namespace ehg {

// Every baseline reports a (localized, distributed) pair under the same
// conventions as the main decomposition. localized + distributed == y for
// all methods except bipolar, whose contract differs (see bipolar()), and
// brtf_cp, which like the main method keeps an explicit noise residual
// (its norm is reported in the diagnostics).
struct BaselineOutput {
    Tensor3 localized;
    Tensor3 distributed;
    std::map<std::string, double> diagnostics;
};

// localized[i,j,k] = y[i+1,j,k] - y[i,j,k] (adjacent electrode rows);
// distributed = y itself. localized has one fewer row than y.
BaselineOutput bipolar(const Tensor3& y);

// Top-k truncated SVD of the (m*n) x T electrodes-by-time matrix as the
// distributed activity; localized is the residual.
BaselineOutput pca_lowrank(const Tensor3& y, int k);

BaselineOutput hosvd(const Tensor3& y, const RankTriple& ranks);

BaselineOutput cp_als(const Tensor3& y, int rank, int max_iters, double tol,
                      std::uint64_t seed);

// Principal component pursuit on the (m*n) x T unfolding via the inexact
// augmented Lagrangian method. lambda <= 0 selects 1/sqrt(max(m*n, T)).
BaselineOutput rpca(const Tensor3& y, double lambda, double tol, int max_iters);

// CP-structured Bayesian robust factorization (the BRTF baseline).
BaselineOutput brtf_cp(const Tensor3& y, const RunOptions& opts, const Priors& priors);

// Per-electrode Daubechies-4 wavelet shrinkage at the universal threshold;
// localized is the denoised signal, distributed the remainder.
// threshold_override, when set, replaces the universal threshold (0 makes
// the transform an identity).
BaselineOutput wavelet_denoise(const Tensor3& y, int levels,
                               std::optional<double> threshold_override = std::nullopt);

// Soft-threshold operator used by rpca and wavelet_denoise.
double soft_threshold(double v, double threshold);

}  // namespace ehg
