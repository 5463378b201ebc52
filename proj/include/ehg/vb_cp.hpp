#pragma once

#include <array>
#include <vector>

#include "ehg/vb_decomposition.hpp"

namespace ehg {

// CP-constrained variant of the decomposition: X is a sum of R rank-one
// terms (super-diagonal core), with one ARD precision per component shared
// across the three factor matrices. Same mean-field contracts as the
// Tucker engine.
struct CpState {
    std::array<Matrix, 3> factor_mean;     // I_n x R
    std::array<Matrix, 3> factor_row_cov;  // R x R, shared by all rows
    Tensor3 s_mean;
    Tensor3 s_var;
    double gamma_a = 0.0;
    Tensor3 gamma_b;
    double lambda_a = 0.0;
    Vector lambda_b;  // per component
    GammaPost tau;

    std::vector<double> elbo_trace;
    std::vector<int> prune_events;

    int rank() const { return int(factor_mean[0].cols()); }
    Vector lambda_mean() const { return (lambda_a / lambda_b.array()).matrix(); }
    Tensor3 x_mean() const;
};

CpState cp_initialize(const Tensor3& y, const Priors& priors, const RunOptions& opts, int rank);
CpState cp_sweep(CpState state, const Tensor3& y, const Priors& priors);
double cp_elbo(const CpState& state, const Tensor3& y, const Priors& priors);
CpState cp_prune(CpState state, double threshold);

// Full run; reports the retained CP rank R as multilinear rank (R, R, R).
DecompositionResult run_cp(const Tensor3& y, const Priors& priors, const RunOptions& opts,
                           int rank);

}  // namespace ehg
