#include "ehg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ehg/errors.hpp"
#include "ehg/rng.hpp"

namespace ehg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unscaled burst value at time tau since burst start; zero outside [0, duration].
double burst_raw(const BurstParams& p, double tau) {
    if (tau < 0.0 || tau > p.duration_s) return 0.0;
    const double sigma = p.duration_s / p.envelope_sigma_div;
    const double c = tau - 0.5 * p.duration_s;
    const double env = std::exp(-0.5 * c * c / (sigma * sigma));
    return env * (p.fwl_amp_mv * std::sin(kTwoPi * p.fwl_freq_hz * tau) +
                  p.fwh_amp_mv * std::sin(kTwoPi * p.fwh_freq_hz * tau));
}

double burst_scale(const BurstParams& p, double fs) {
    const int len = int(std::lround(p.duration_s * fs));
    double peak = 0.0;
    for (int k = 0; k < len; ++k) peak = std::max(peak, std::abs(burst_raw(p, k / fs)));
    return peak > 0.0 ? p.peak_amp_mv / peak : 0.0;
}

bool tone_active(const ToneParams& p, double t) {
    if (!p.active_interval_s) return true;
    return t >= p.active_interval_s->first && t <= p.active_interval_s->second;
}

void validate(const SimConfig& c) {
    if (c.grid_rows < 1 || c.grid_cols < 1) throw ConfigError("simulate: empty electrode grid");
    if (c.sample_rate_hz <= 0.0 || c.duration_s <= 0.0)
        throw ConfigError("simulate: sample rate and duration must be positive");
    const double nyq = c.sample_rate_hz / 2.0;
    for (double f : {c.burst.fwl_freq_hz, c.burst.fwh_freq_hz, c.slow_wave.freq_hz,
                     c.respiration.freq_hz, c.cardiac.freq_hz})
        if (f >= nyq) throw ConfigError("simulate: component frequency at or above Nyquist");
    const double max_delay =
        (c.grid_rows - 1) * c.electrode_spacing_m / c.burst.propagation_speed_m_per_s;
    if (c.duration_s < c.burst.duration_s + max_delay)
        throw ConfigError("simulate: duration shorter than burst plus propagation delay");
    if (c.respiration.amp_max_mv < c.respiration.amp_min_mv || c.respiration.amp_min_mv < 0.0)
        throw ConfigError("simulate: respiration gradient requires amp_max >= amp_min >= 0");
    if (c.burst.peak_amp_mv <= 0.0 || c.burst.duration_s <= 0.0)
        throw ConfigError("simulate: burst peak amplitude and duration must be positive");
}

}  // namespace

std::vector<double> burst_waveform(const BurstParams& params, double sample_rate_hz) {
    if (sample_rate_hz <= 0.0) throw ConfigError("burst_waveform: sample rate must be positive");
    const int len = int(std::lround(params.duration_s * sample_rate_hz));
    const double scale = burst_scale(params, sample_rate_hz);
    std::vector<double> w(len);
    for (int k = 0; k < len; ++k) w[k] = scale * burst_raw(params, k / sample_rate_hz);
    return w;
}

GroundTruthBundle simulate(const SimConfig& config) {
    validate(config);
    const int rows = config.grid_rows, cols = config.grid_cols;
    const double fs = config.sample_rate_hz;
    const int T = int(std::lround(config.duration_s * fs));

    BurstParams burst = config.burst;
    const double max_delay =
        (rows - 1) * config.electrode_spacing_m / burst.propagation_speed_m_per_s;
    if (burst.onset_s < 0.0)
        burst.onset_s = 0.5 * (config.duration_s - burst.duration_s - max_delay);
    const double scale = burst_scale(burst, fs);
    const double row_delay = config.electrode_spacing_m / burst.propagation_speed_m_per_s;

    // Slow wave runs only while some electrode row still records the burst.
    const double sw_start = burst.onset_s;
    const double sw_end = burst.onset_s + burst.duration_s + max_delay;

    const int diag_span = (rows - 1) + (cols - 1);
    auto resp_amp = [&](int i, int j) {
        if (diag_span == 0) return config.respiration.amp_max_mv;
        const double frac = double(i + j) / diag_span;
        return config.respiration.amp_max_mv +
               (config.respiration.amp_min_mv - config.respiration.amp_max_mv) * frac;
    };

    Tensor3 s(rows, cols, T), x(rows, cols, T);
    for (int k = 0; k < T; ++k) {
        const double t = k / fs;
        const double sw = (config.slow_wave.amp_mv != 0.0 && t >= sw_start && t <= sw_end &&
                           tone_active(config.slow_wave, t))
                              ? config.slow_wave.amp_mv * std::sin(kTwoPi * config.slow_wave.freq_hz * t)
                              : 0.0;
        const double resp_osc = std::sin(kTwoPi * config.respiration.freq_hz * t);
        const double card = tone_active(config.cardiac, t)
                                ? config.cardiac.amp_mv * std::sin(kTwoPi * config.cardiac.freq_hz * t)
                                : 0.0;
        for (int j = 0; j < cols; ++j) {
            for (int i = 0; i < rows; ++i) {
                s(i, j, k) = scale * burst_raw(burst, t - burst.onset_s - i * row_delay);
                x(i, j, k) = sw + resp_amp(i, j) * resp_osc + card;
            }
        }
    }

    // Noise variance from the target SNR over the full clean tensor.
    const Vector clean = s.data() + x.data();
    const double p_signal = clean.squaredNorm() / double(clean.size());
    const double sigma = std::sqrt(p_signal / std::pow(10.0, config.target_snr_db / 10.0));

    GaussianStream g(config.seed);
    Tensor3 e(rows, cols, T);
    for (std::int64_t idx = 0; idx < e.count(); ++idx) e.data()[idx] = sigma * g.next();

    GroundTruthBundle b{Tensor3(s.dims(), clean + e.data()), std::move(s), std::move(x),
                        std::move(e)};
    return b;
}

}  // namespace ehg
