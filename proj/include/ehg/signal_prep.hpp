#pragma once

#include <complex>
#include <vector>

#include "ehg/tensor.hpp"

namespace ehg {

struct FilterSpec {
    int order = 4;  // bandpass order per pass (order biquad sections, 2*order poles)
    double f_lo_hz = 0.05;
    double f_hi_hz = 4.0;
    bool bidirectional = true;
};

// One second-order section, direct form II transposed.
struct Biquad {
    double b0, b1, b2;  // numerator
    double a1, a2;      // denominator (a0 normalized to 1)
};

// Digital Butterworth bandpass as a cascade of biquads (bilinear transform
// of the analog prototype, gain normalized at the band center).
std::vector<Biquad> design_butter_bandpass(const FilterSpec& spec, double fs);

// Single-pass magnitude response of the cascade at frequency f (test oracle
// and stability checks).
double cascade_magnitude(const std::vector<Biquad>& sections, double f_hz, double fs);

// Causal pass of the cascade over a series.
std::vector<double> filter_series(const std::vector<Biquad>& sections,
                                  const std::vector<double>& x);

// Zero-phase (forward-backward when spec.bidirectional) filtering with odd
// reflect padding of 3 periods of f_lo, cropped back to the input length.
std::vector<double> filtfilt_series(const std::vector<Biquad>& sections, double fs,
                                    const FilterSpec& spec, const std::vector<double>& x);

// Drops the first round(seconds*fs) samples along mode 3.
Tensor3 trim_head(const Tensor3& x, double fs, double seconds);

// Per-electrode zero-phase Butterworth bandpass.
Tensor3 bandpass(const Tensor3& x, double fs, const FilterSpec& spec);

// Pure subsampling along mode 3 (every factor-th sample, starting at 0).
Tensor3 decimate(const Tensor3& x, int factor);

// Guard used by the CLI: decimation is refused when the preceding bandpass
// did not limit content below the post-decimation Nyquist.
void check_decimation_safe(double fs, int factor, double f_hi_hz, bool allow_aliasing);

}  // namespace ehg
