#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ehg/tensor.hpp"

namespace ehg {

// EHG burst: two enveloped sine waves (FWL + FWH) travelling down the
// electrode rows.
struct BurstParams {
    double fwl_freq_hz = 0.2;
    double fwl_amp_mv = 0.2;
    double fwh_freq_hz = 0.6;
    double fwh_amp_mv = 0.3;
    double duration_s = 80.0;
    double peak_amp_mv = 0.5;
    // Gaussian envelope centered at duration/2; sigma = duration/envelope_sigma_div
    // puts the edge amplitude at exp(-4.5) ~ 1.1% of peak for the default 6.
    double envelope_sigma_div = 6.0;
    double propagation_speed_m_per_s = 0.04;
    // Burst start on electrode row 0; negative means "center the burst in the
    // recording" (resolved to (duration_rec - duration_s)/2).
    double onset_s = -1.0;
};

struct ToneParams {
    double freq_hz = 0.0;
    double amp_mv = 0.0;
    std::optional<std::pair<double, double>> active_interval_s;  // default: whole recording
};

// Amplitude falls off linearly with (row + col) along the main diagonal.
struct GradientToneParams {
    double freq_hz = 0.3;
    double amp_max_mv = 3.0;  // electrode (0,0)
    double amp_min_mv = 1.5;  // electrode (rows-1, cols-1)
};

struct SimConfig {
    int grid_rows = 4;
    int grid_cols = 4;
    double electrode_spacing_m = 0.0175;
    double sample_rate_hz = 10.0;
    double duration_s = 600.0;
    BurstParams burst;
    ToneParams slow_wave{0.02, 7.0, std::nullopt};
    GradientToneParams respiration;
    ToneParams cardiac{1.2, 0.03, std::nullopt};
    double target_snr_db = 15.0;
    std::uint64_t seed = 0;
};

struct GroundTruthBundle {
    Tensor3 y;       // measurements = s_true + x_true + e_true, bit-exact
    Tensor3 s_true;  // localized (travelling burst)
    Tensor3 x_true;  // distributed (slow wave + respiration + cardiac)
    Tensor3 e_true;  // i.i.d. Gaussian noise, calibrated to target_snr_db
};

// Burst time series on one electrode row (before propagation delay):
// Gaussian envelope times the FWL+FWH sine sum, rescaled so the series
// maximum equals peak_amp_mv.
std::vector<double> burst_waveform(const BurstParams& params, double sample_rate_hz);

GroundTruthBundle simulate(const SimConfig& config);

}  // namespace ehg
