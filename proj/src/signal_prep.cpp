#include "ehg/signal_prep.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ehg/errors.hpp"

namespace ehg {

namespace {

using cplx = std::complex<double>;

void validate_spec(const FilterSpec& spec, double fs) {
    if (spec.order < 1) throw ConfigError("bandpass: filter order must be >= 1");
    if (!(0.0 < spec.f_lo_hz && spec.f_lo_hz < spec.f_hi_hz && spec.f_hi_hz < fs / 2.0))
        throw ConfigError("bandpass: need 0 < f_lo < f_hi < fs/2");
}

}  // namespace

std::vector<Biquad> design_butter_bandpass(const FilterSpec& spec, double fs) {
    validate_spec(spec, fs);
    const int N = spec.order;
    const double w_lo = std::tan(std::numbers::pi * spec.f_lo_hz / fs);
    const double w_hi = std::tan(std::numbers::pi * spec.f_hi_hz / fs);
    const double bw = w_hi - w_lo;
    const double w0sq = w_lo * w_hi;

    // Analog poles: lowpass prototype poles through the bandpass transform
    // s -> (s^2 + w0^2) / (bw * s).
    std::vector<cplx> apoles;
    for (int k = 0; k < N; ++k) {
        const double theta = std::numbers::pi * (2.0 * k + N + 1.0) / (2.0 * N);
        const cplx p(std::cos(theta), std::sin(theta));
        const cplx disc = std::sqrt(p * p * bw * bw - 4.0 * w0sq);
        apoles.push_back(0.5 * (p * bw + disc));
        apoles.push_back(0.5 * (p * bw - disc));
    }

    // Bilinear transform; N zeros at z=1 (from s=0) and N at z=-1 (from inf).
    std::vector<cplx> zpoles;
    for (const cplx& s : apoles) {
        const cplx z = (1.0 + s) / (1.0 - s);
        if (std::abs(z) >= 1.0)
            throw ConfigError("bandpass: unstable design (cutoffs too close to Nyquist or 0)");
        zpoles.push_back(z);
    }

    // Pair poles into second-order sections: conjugate pairs first, then
    // leftover (numerically real) poles two at a time.
    constexpr double imag_tol = 1e-9;
    std::vector<cplx> complex_reps;
    std::vector<double> reals;
    for (const cplx& z : zpoles) {
        if (z.imag() > imag_tol)
            complex_reps.push_back(z);
        else if (std::abs(z.imag()) <= imag_tol)
            reals.push_back(z.real());
    }
    std::sort(reals.begin(), reals.end());

    std::vector<Biquad> sections;
    for (const cplx& z : complex_reps)
        sections.push_back({1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2)
        sections.push_back({1.0, 0.0, -1.0, -(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]});
    if (int(sections.size()) != N)
        throw NumericalError("bandpass: pole pairing failed");

    // Normalize to unity gain at the (digital) band center, spreading the
    // correction evenly across sections.
    const double f_center = fs / (2.0 * std::numbers::pi) * 2.0 * std::atan(std::sqrt(w0sq));
    const double mag = cascade_magnitude(sections, f_center, fs);
    if (!(mag > 0.0) || !std::isfinite(mag))
        throw NumericalError("bandpass: degenerate center-frequency response");
    const double g = std::pow(1.0 / mag, 1.0 / N);
    for (Biquad& s : sections) {
        s.b0 *= g;
        s.b1 *= g;
        s.b2 *= g;
    }
    return sections;
}

double cascade_magnitude(const std::vector<Biquad>& sections, double f_hz, double fs) {
    const double w = 2.0 * std::numbers::pi * f_hz / fs;
    const cplx z1 = std::exp(cplx(0.0, -w));  // z^-1
    const cplx z2 = z1 * z1;
    double mag = 1.0;
    for (const Biquad& s : sections)
        mag *= std::abs((s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2));
    return mag;
}

std::vector<double> filter_series(const std::vector<Biquad>& sections,
                                  const std::vector<double>& x) {
    std::vector<double> y = x;
    for (const Biquad& s : sections) {
        double z1 = 0.0, z2 = 0.0;  // direct form II transposed state
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

std::vector<double> filtfilt_series(const std::vector<Biquad>& sections, double fs,
                                    const FilterSpec& spec, const std::vector<double>& x) {
    const std::int64_t T = std::int64_t(x.size());
    if (T < 2) return x;
    // Odd-reflect padding, 3 periods of the low cutoff (the slowest transient).
    const std::int64_t pad =
        std::min<std::int64_t>(T - 1, std::int64_t(std::ceil(3.0 * fs / spec.f_lo_hz)));
    std::vector<double> ext(T + 2 * pad);
    for (std::int64_t i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
    for (std::int64_t i = 0; i < T; ++i) ext[pad + i] = x[i];
    for (std::int64_t i = 0; i < pad; ++i) ext[pad + T + i] = 2.0 * x[T - 1] - x[T - 2 - i];

    std::vector<double> y = filter_series(sections, ext);
    if (spec.bidirectional) {
        std::reverse(y.begin(), y.end());
        y = filter_series(sections, y);
        std::reverse(y.begin(), y.end());
    }
    return {y.begin() + pad, y.begin() + pad + T};
}

Tensor3 trim_head(const Tensor3& x, double fs, double seconds) {
    if (seconds < 0.0) throw ArgumentError("trim_head: seconds must be nonnegative");
    const int drop = int(std::lround(seconds * fs));
    if (drop >= x.t()) throw ArgumentError("trim_head: trim longer than recording");
    Tensor3 out(x.m(), x.n(), x.t() - drop);
    for (int k = 0; k < out.t(); ++k)
        for (int j = 0; j < x.n(); ++j)
            for (int i = 0; i < x.m(); ++i) out(i, j, k) = x(i, j, k + drop);
    return out;
}

Tensor3 bandpass(const Tensor3& x, double fs, const FilterSpec& spec) {
    const auto sections = design_butter_bandpass(spec, fs);
    Tensor3 out(x.m(), x.n(), x.t());
    std::vector<double> series(x.t());
    for (int j = 0; j < x.n(); ++j) {
        for (int i = 0; i < x.m(); ++i) {
            for (int k = 0; k < x.t(); ++k) series[k] = x(i, j, k);
            const auto filtered = filtfilt_series(sections, fs, spec, series);
            for (int k = 0; k < x.t(); ++k) out(i, j, k) = filtered[k];
        }
    }
    return out;
}

Tensor3 decimate(const Tensor3& x, int factor) {
    if (factor < 1) throw ArgumentError("decimate: factor must be >= 1");
    const int T = x.t() / factor;
    Tensor3 out(x.m(), x.n(), T);
    for (int k = 0; k < T; ++k)
        for (int j = 0; j < x.n(); ++j)
            for (int i = 0; i < x.m(); ++i) out(i, j, k) = x(i, j, std::int64_t(k) * factor);
    return out;
}

void check_decimation_safe(double fs, int factor, double f_hi_hz, bool allow_aliasing) {
    if (factor < 1) throw ArgumentError("decimate: factor must be >= 1");
    if (!allow_aliasing && f_hi_hz >= fs / (2.0 * factor))
        throw ConfigError(
            "decimate: band edge at or above the post-decimation Nyquist; "
            "bandpass lower first or pass --allow-aliasing");
}

}  // namespace ehg
