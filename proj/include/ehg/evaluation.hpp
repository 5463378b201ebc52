#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ehg/annotations.hpp"
#include "ehg/baselines.hpp"
#include "ehg/simulator.hpp"
#include "ehg/tensor.hpp"
#include "ehg/vb_decomposition.hpp"

namespace ehg {

enum class CorrelationMode { flattened, per_electrode_mean };

double pearson(const std::vector<double>& a, const std::vector<double>& b);
double pearson(const Vector& a, const Vector& b);

double tensor_correlation(const Tensor3& est, const Tensor3& truth, CorrelationMode mode);

struct SnrReport {
    Matrix per_electrode_db;  // m x n
    double mean_db = 0.0;
    double ci95_lo_db = 0.0;
    double ci95_hi_db = 0.0;
    int n_contraction = 0;
    int n_dummy = 0;
};

// Per electrode: 10*log10(mean square over contraction samples / mean
// square over dummy samples); mean and a t-based 95% CI over electrodes.
SnrReport snr_db(const Tensor3& x, double fs, const AnnotationSet& ann);

// Morlet continuous wavelet transform magnitudes on n_freqs log-spaced
// frequencies; returns the frequency list and an n_freqs x T grid.
struct Scalogram {
    std::vector<double> freqs_hz;
    Matrix magnitude;  // n_freqs x T
};
Scalogram scalogram(const std::vector<double>& series, double fs, double f_min_hz,
                    double f_max_hz, int n_freqs, double morlet_cycles = 6.0);

// --- method comparison -----------------------------------------------------

struct MethodSpec {
    std::string name;  // vb-tucker | brtf-cp | rpca | pca | hosvd | cp-als |
                       // bipolar | wavelet | raw
    // Optional tuned hyperparameters; negative/empty means default or tuned.
    int pca_k = -1;
    RankTriple hosvd_ranks{-1, -1, -1};
    int cp_rank = -1;
    double rpca_lambda = -1.0;
    int wavelet_levels = 5;
    RunOptions vb_opts;
    Priors vb_priors;
};

struct MethodRow {
    std::string name;
    bool ok = false;
    std::string error;
    int runs = 1;
    double corr_localized_flat = 0.0;
    double corr_localized_electrode = 0.0;
    double corr_distributed_flat = 0.0;
    double corr_distributed_electrode = 0.0;
    std::optional<SnrReport> snr;
};

struct CompareReport {
    std::vector<MethodRow> rows;
    int stochastic_runs = 0;
};

bool method_is_stochastic(const std::string& name);

// Runs one method on y; the Bayesian methods report their posterior-mean
// sparse/low-rank parts (noise separate), the rest split y exactly.
BaselineOutput run_method(const MethodSpec& spec, const Tensor3& y, std::uint64_t seed);

// Correlation scoring against ground truth and/or annotation SNR. Stochastic
// methods are averaged over seeds 0..n_runs-1.
CompareReport compare_methods(const Tensor3& y, const GroundTruthBundle* truth,
                              const AnnotationSet* ann, double fs,
                              const std::vector<MethodSpec>& methods, int n_runs = 100);

std::string format_table(const CompareReport& report, bool with_truth, bool with_ann);
std::string report_json(const CompareReport& report);

// Small grid searches used to realize the paper protocol's tuned
// hyperparameters; scored by localized correlation with ground truth.
MethodSpec tune_method(const std::string& name, const Tensor3& y,
                       const GroundTruthBundle& truth);

}  // namespace ehg
