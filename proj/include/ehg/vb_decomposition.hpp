#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ehg/tensor.hpp"

namespace ehg {

// Gamma shape/rate hyperpriors for the noise precision tau, the per-entry
// sparse precisions gamma_ijk, and the per-column factor/core precisions
// lambda_r^(n). Defaults are broad and noninformative.
struct Priors {
    double a_tau = 1e-6, b_tau = 1e-6;
    double a_gamma = 1e-6, b_gamma = 1e-6;
    double a_lambda = 1e-6, b_lambda = 1e-6;
};

struct RankTriple {
    int r1 = 0, r2 = 0, r3 = 0;
    bool operator==(const RankTriple&) const = default;
};

struct RunOptions {
    int max_iters = 500;
    double tol = 1e-5;
    // Upper bounds on the multilinear rank; nonpositive entries resolve to
    // the mode size capped at (4, 4, 32).
    RankTriple init_rank{0, 0, 0};
    double prune_threshold = 1e4;
    std::uint64_t seed = 0;
    double jitter_scale_rel = 1e-2;  // times the data standard deviation
};

// Gamma posterior in shape/rate form.
struct GammaPost {
    double a = 0.0, b = 0.0;
    double mean() const { return a / b; }
};

// All variational factors of the mean-field posterior
//   q = q(U1) q(U2) q(U3) q(G) q(S) q(gamma) q(lambda) q(tau).
// Factor rows share one covariance per mode: the row precisions are
// identical under the model, so the shared matrix is the exact row-wise
// posterior, not an approximation. The per-column precisions lambda_r^(n)
// govern both the factor columns and, through their three-way products,
// the core entries; the extra per-slice shape contribution this adds to
// q(lambda) is what drives unused columns' precisions to diverge and get
// pruned.
struct PosteriorState {
    std::array<Matrix, 3> factor_mean;     // I_n x R_n
    std::array<Matrix, 3> factor_row_cov;  // R_n x R_n, shared by all rows
    Tensor3 core_mean;                     // R1 x R2 x R3
    Matrix core_cov;                       // (R1 R2 R3)^2, vec order mode-1 fastest
    Tensor3 s_mean;
    Tensor3 s_var;
    double gamma_a = 0.0;  // shared shape (the update adds 1/2 uniformly)
    Tensor3 gamma_b;       // per-entry rate
    std::array<double, 3> lambda_a{};  // shared shape per mode
    std::array<Vector, 3> lambda_b;    // per-column rates
    GammaPost tau;

    std::vector<double> elbo_trace;
    std::vector<int> prune_events;  // trace indices after which a prune occurred

    RankTriple rank() const {
        return {int(factor_mean[0].cols()), int(factor_mean[1].cols()),
                int(factor_mean[2].cols())};
    }
    Vector lambda_mean(int mode_idx) const {
        return (lambda_a[std::size_t(mode_idx)] / lambda_b[std::size_t(mode_idx)].array())
            .matrix();
    }
    // Posterior mean of the distributed tensor X.
    Tensor3 x_mean() const;
};

struct DecompositionResult {
    Tensor3 s;
    Tensor3 x;
    Tensor3 e;  // y - s - x, exact
    RankTriple multilinear_rank;
    double noise_precision = 0.0;
    std::vector<double> elbo_trace;
    std::vector<int> prune_events;
    int iterations = 0;
    bool converged = false;
};

// Deterministic initialization: entries far outside the robust bulk seed
// the sparse part, the factor means come from the HOSVD of the cleaned
// tensor plus seeded Gaussian jitter, and the precision posteriors start
// at the data scale (see the implementation notes).
PosteriorState initialize(const Tensor3& y, const Priors& priors, const RunOptions& opts);

// One full cycle of closed-form mean-field updates in the fixed order
// U1, U2, U3, core, S, then gamma, lambda, tau.
PosteriorState vb_sweep(PosteriorState state, const Tensor3& y, const Priors& priors);

double elbo(const PosteriorState& state, const Tensor3& y, const Priors& priors);

// Drops mode-n columns whose ARD precision mean exceeds threshold times the
// smallest one, together with the matching core slices. If the whole
// reconstruction has collapsed to a negligible norm (pure-noise inputs), the
// precisions tie and the ratio cannot fire; each mode is then collapsed to a
// single column with a warning.
PosteriorState prune_ranks(PosteriorState state, double threshold);

DecompositionResult run(const Tensor3& y, const Priors& priors, const RunOptions& opts);

RankTriple resolve_init_rank(const Dims3& dims, const RankTriple& requested);

// When the sparse-precision hyperprior is left at the noninformative default,
// it is replaced by the empirical, data-scaled prior Gamma(1, 1e-4 var(y)).
// A fully noninformative per-entry prior leaves the likelihood unable to
// tell the noise precision tau from a uniform gamma, and the ELBO grows
// without bound as both diverge with s absorbing the noise; anchoring gamma
// at high precision relative to the data scale bounds the ELBO and reserves
// s for entries that stand far out of the bulk. Callers that set a_gamma or
// b_gamma explicitly are taken at their word. Used by run()/run_cp().
Priors resolve_priors(const Tensor3& y, const Priors& priors);

}  // namespace ehg
