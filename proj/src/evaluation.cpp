#include "ehg/evaluation.hpp"

#include <fftw3.h>

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "ehg/errors.hpp"
#include "json.hpp"

namespace ehg {

namespace {

Vector electrode_series(const Tensor3& x, int i, int j) {
    Vector s(x.t());
    for (int k = 0; k < x.t(); ++k) s[k] = x(i, j, k);
    return s;
}

// Ground truth rows matched to a bipolar estimate: localized activity of
// the electrode whose signal the row difference localizes.
Tensor3 head_rows(const Tensor3& x, int rows) {
    Tensor3 out(rows, x.n(), x.t());
    for (int k = 0; k < x.t(); ++k)
        for (int j = 0; j < x.n(); ++j)
            for (int i = 0; i < rows; ++i) out(i, j, k) = x(i, j, k);
    return out;
}

}  // namespace

double pearson(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ArgumentError("pearson: series lengths differ");
    if (a.size() < 2) throw ArgumentError("pearson: need at least two samples");
    const double ma = a.mean(), mb = b.mean();
    const Vector da = a.array() - ma, db = b.array() - mb;
    const double na = da.norm(), nb = db.norm();
    if (na == 0.0 || nb == 0.0)
        throw ArgumentError("pearson: correlation undefined for a constant series");
    return da.dot(db) / (na * nb);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    return pearson(Eigen::Map<const Vector>(a.data(), Eigen::Index(a.size())),
                   Eigen::Map<const Vector>(b.data(), Eigen::Index(b.size())));
}

double tensor_correlation(const Tensor3& est, const Tensor3& truth, CorrelationMode mode) {
    if (!(est.dims() == truth.dims())) throw ArgumentError("tensor_correlation: dims differ");
    if (mode == CorrelationMode::flattened) return pearson(est.data(), truth.data());
    double sum = 0.0;
    for (int j = 0; j < est.n(); ++j)
        for (int i = 0; i < est.m(); ++i)
            sum += pearson(electrode_series(est, i, j), electrode_series(truth, i, j));
    return sum / (double(est.m()) * est.n());
}

SnrReport snr_db(const Tensor3& x, double fs, const AnnotationSet& ann) {
    validate_annotations(ann);
    const auto contractions = ann.of_kind(IntervalKind::contraction);
    const auto dummies = ann.of_kind(IntervalKind::dummy);
    if (contractions.empty() || dummies.empty())
        throw ArgumentError("snr_db: need at least one contraction and one dummy interval");
    const double duration = x.t() / fs;
    for (const auto& iv : ann.intervals)
        if (iv.start_s < 0.0 || iv.end_s > duration + 1e-9)
            throw ArgumentError("snr_db: interval outside recording bounds");

    auto mean_square = [&](int i, int j, const std::vector<Interval>& ivs) {
        double acc = 0.0;
        std::int64_t count = 0;
        for (const auto& iv : ivs) {
            const int k0 = std::max(0, int(std::ceil(iv.start_s * fs - 1e-9)));
            const int k1 = std::min(x.t(), int(std::ceil(iv.end_s * fs - 1e-9)));
            for (int k = k0; k < k1; ++k) {
                acc += x(i, j, k) * x(i, j, k);
                ++count;
            }
        }
        if (count == 0) throw ArgumentError("snr_db: interval contains no samples");
        return acc / double(count);
    };

    SnrReport rep;
    rep.per_electrode_db = Matrix(x.m(), x.n());
    rep.n_contraction = int(contractions.size());
    rep.n_dummy = int(dummies.size());
    std::vector<double> values;
    for (int j = 0; j < x.n(); ++j)
        for (int i = 0; i < x.m(); ++i) {
            const double pc = mean_square(i, j, contractions);
            const double pd = mean_square(i, j, dummies);
            const double snr = pd > 0.0 ? 10.0 * std::log10(pc / pd)
                                        : std::numeric_limits<double>::infinity();
            rep.per_electrode_db(i, j) = snr;
            values.push_back(snr);
        }
    const int n = int(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    rep.mean_db = mean;
    if (n > 1 && std::isfinite(mean)) {
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= (n - 1);
        const boost::math::students_t dist(n - 1);
        const double half = boost::math::quantile(dist, 0.975) * std::sqrt(var / n);
        rep.ci95_lo_db = mean - half;
        rep.ci95_hi_db = mean + half;
    } else {
        rep.ci95_lo_db = rep.ci95_hi_db = mean;
    }
    return rep;
}

Scalogram scalogram(const std::vector<double>& series, double fs, double f_min_hz,
                    double f_max_hz, int n_freqs, double morlet_cycles) {
    if (!(0.0 < f_min_hz && f_min_hz < f_max_hz && f_max_hz <= fs / 2.0))
        throw ArgumentError("scalogram: need 0 < f_min < f_max <= fs/2");
    if (n_freqs < 1) throw ArgumentError("scalogram: n_freqs must be >= 1");
    const int T = int(series.size());
    if (T < 2) throw ArgumentError("scalogram: series too short");

    int nfft = 1;
    while (nfft < 2 * T) nfft *= 2;

    std::vector<std::complex<double>> spec(static_cast<std::size_t>(nfft));
    {
        std::vector<std::complex<double>> in(static_cast<std::size_t>(nfft), 0.0);
        for (int k = 0; k < T; ++k) in[std::size_t(k)] = series[std::size_t(k)];
        fftw_plan plan = fftw_plan_dft_1d(nfft, reinterpret_cast<fftw_complex*>(in.data()),
                                          reinterpret_cast<fftw_complex*>(spec.data()),
                                          FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    Scalogram out;
    out.freqs_hz.resize(std::size_t(n_freqs));
    for (int i = 0; i < n_freqs; ++i)
        out.freqs_hz[std::size_t(i)] =
            n_freqs == 1 ? f_min_hz
                         : f_min_hz * std::pow(f_max_hz / f_min_hz, double(i) / (n_freqs - 1));
    out.magnitude = Matrix(n_freqs, T);

    std::vector<std::complex<double>> prod(static_cast<std::size_t>(nfft));
    std::vector<std::complex<double>> coef(static_cast<std::size_t>(nfft));
    fftw_plan inv = fftw_plan_dft_1d(nfft, reinterpret_cast<fftw_complex*>(prod.data()),
                                     reinterpret_cast<fftw_complex*>(coef.data()),
                                     FFTW_BACKWARD, FFTW_ESTIMATE);
    const double norm_fft = 1.0 / nfft;
    for (int fi = 0; fi < n_freqs; ++fi) {
        // Scale in samples per radian for the analytic Morlet wavelet.
        const double scale = morlet_cycles * fs / (2.0 * std::numbers::pi * out.freqs_hz[std::size_t(fi)]);
        const double amp = std::pow(std::numbers::pi, -0.25) *
                           std::sqrt(2.0 * std::numbers::pi * scale);
        for (int k = 0; k < nfft; ++k) {
            double w = 2.0 * std::numbers::pi * k / nfft;
            if (k > nfft / 2) w -= 2.0 * std::numbers::pi;  // negative frequencies
            const double window =
                w > 0.0 ? amp * std::exp(-0.5 * (scale * w - morlet_cycles) *
                                         (scale * w - morlet_cycles))
                        : 0.0;
            prod[std::size_t(k)] = spec[std::size_t(k)] * window * norm_fft;
        }
        fftw_execute(inv);
        for (int k = 0; k < T; ++k)
            out.magnitude(fi, k) = std::abs(coef[std::size_t(k)]);
    }
    fftw_destroy_plan(inv);
    return out;
}

bool method_is_stochastic(const std::string& name) {
    return name == "vb-tucker" || name == "brtf-cp" || name == "cp-als";
}

BaselineOutput run_method(const MethodSpec& spec, const Tensor3& y, std::uint64_t seed) {
    const std::string& name = spec.name;
    if (name == "raw") return {y, y, {}};
    if (name == "bipolar") return bipolar(y);
    if (name == "pca") {
        const int k = spec.pca_k > 0 ? spec.pca_k : std::min<int>(3, std::min<Eigen::Index>(
                                                         y.m() * y.n(), y.t()));
        return pca_lowrank(y, k);
    }
    if (name == "hosvd") {
        RankTriple r = spec.hosvd_ranks;
        if (r.r1 <= 0) r = {std::min(y.m(), 2), std::min(y.n(), 2), std::min(y.t(), 3)};
        return hosvd(y, r);
    }
    if (name == "cp-als") {
        const int rank = spec.cp_rank > 0 ? spec.cp_rank : 3;
        return cp_als(y, rank, 200, 1e-8, seed);
    }
    if (name == "rpca") return rpca(y, spec.rpca_lambda, 1e-7, 500);
    if (name == "wavelet") return wavelet_denoise(y, spec.wavelet_levels);
    if (name == "vb-tucker") {
        RunOptions opts = spec.vb_opts;
        opts.seed = seed;
        const DecompositionResult res = ::ehg::run(y, spec.vb_priors, opts);
        BaselineOutput out{res.s, res.x, {}};
        out.diagnostics["iterations"] = double(res.iterations);
        out.diagnostics["converged"] = res.converged ? 1.0 : 0.0;
        return out;
    }
    if (name == "brtf-cp") {
        RunOptions opts = spec.vb_opts;
        opts.seed = seed;
        return brtf_cp(y, opts, spec.vb_priors);
    }
    throw ArgumentError("unknown method: " + name);
}

CompareReport compare_methods(const Tensor3& y, const GroundTruthBundle* truth,
                              const AnnotationSet* ann, double fs,
                              const std::vector<MethodSpec>& methods, int n_runs) {
    if (truth == nullptr && ann == nullptr)
        throw ArgumentError("compare_methods: need ground truth or annotations");
    CompareReport report;
    report.stochastic_runs = n_runs;
    for (const auto& spec : methods) {
        MethodRow row;
        row.name = spec.name;
        try {
            const int runs = (method_is_stochastic(spec.name) && truth != nullptr)
                                 ? std::max(1, n_runs)
                                 : 1;
            row.runs = runs;
            BaselineOutput first;
            for (int r = 0; r < runs; ++r) {
                BaselineOutput out = run_method(spec, y, std::uint64_t(r));
                if (truth != nullptr) {
                    Tensor3 s_ref = truth->s_true;
                    Tensor3 x_ref = truth->x_true;
                    if (out.localized.m() != y.m())  // bipolar drops one row
                        s_ref = head_rows(truth->s_true, out.localized.m());
                    row.corr_localized_flat +=
                        tensor_correlation(out.localized, s_ref, CorrelationMode::flattened);
                    row.corr_localized_electrode += tensor_correlation(
                        out.localized, s_ref, CorrelationMode::per_electrode_mean);
                    row.corr_distributed_flat +=
                        tensor_correlation(out.distributed, x_ref, CorrelationMode::flattened);
                    row.corr_distributed_electrode += tensor_correlation(
                        out.distributed, x_ref, CorrelationMode::per_electrode_mean);
                }
                if (r == 0) first = std::move(out);
            }
            row.corr_localized_flat /= runs;
            row.corr_localized_electrode /= runs;
            row.corr_distributed_flat /= runs;
            row.corr_distributed_electrode /= runs;
            if (ann != nullptr) row.snr = snr_db(first.localized, fs, *ann);
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string format_table(const CompareReport& report, bool with_truth, bool with_ann) {
    std::ostringstream os;
    os << "method        ";
    if (with_truth) os << "  r_loc(flat)  r_loc(elec)  r_dst(flat)  r_dst(elec)";
    if (with_ann) os << "  snr_db  ci95_lo  ci95_hi";
    os << "  runs\n";
    for (const auto& row : report.rows) {
        char buf[256];
        if (!row.ok) {
            std::snprintf(buf, sizeof(buf), "%-14s  FAILED: %s\n", row.name.c_str(),
                          row.error.c_str());
            os << buf;
            continue;
        }
        std::snprintf(buf, sizeof(buf), "%-14s", row.name.c_str());
        os << buf;
        if (with_truth) {
            std::snprintf(buf, sizeof(buf), "  %11.4f  %11.4f  %11.4f  %11.4f",
                          row.corr_localized_flat, row.corr_localized_electrode,
                          row.corr_distributed_flat, row.corr_distributed_electrode);
            os << buf;
        }
        if (with_ann && row.snr) {
            std::snprintf(buf, sizeof(buf), "  %6.2f  %7.2f  %7.2f", row.snr->mean_db,
                          row.snr->ci95_lo_db, row.snr->ci95_hi_db);
            os << buf;
        }
        std::snprintf(buf, sizeof(buf), "  %4d\n", row.runs);
        os << buf;
    }
    return os.str();
}

std::string report_json(const CompareReport& report) {
    nlohmann::json j;
    j["stochastic_runs"] = report.stochastic_runs;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json r;
        r["method"] = row.name;
        r["ok"] = row.ok;
        if (!row.ok) {
            r["error"] = row.error;
        } else {
            r["runs"] = row.runs;
            r["corr_localized_flat"] = row.corr_localized_flat;
            r["corr_localized_electrode"] = row.corr_localized_electrode;
            r["corr_distributed_flat"] = row.corr_distributed_flat;
            r["corr_distributed_electrode"] = row.corr_distributed_electrode;
            if (row.snr) {
                r["snr_mean_db"] = row.snr->mean_db;
                r["snr_ci95_lo_db"] = row.snr->ci95_lo_db;
                r["snr_ci95_hi_db"] = row.snr->ci95_hi_db;
            }
        }
        j["rows"].push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

MethodSpec tune_method(const std::string& name, const Tensor3& y,
                       const GroundTruthBundle& truth) {
    MethodSpec best;
    best.name = name;
    auto score = [&](const MethodSpec& spec) {
        const BaselineOutput out = run_method(spec, y, 0);
        Tensor3 s_ref = truth.s_true;
        if (out.localized.m() != y.m()) s_ref = head_rows(truth.s_true, out.localized.m());
        return tensor_correlation(out.localized, s_ref, CorrelationMode::flattened);
    };
    double best_score = -2.0;
    auto consider = [&](MethodSpec spec) {
        const double s = score(spec);
        if (s > best_score) {
            best_score = s;
            best = std::move(spec);
        }
    };
    if (name == "pca") {
        const int kmax = int(std::min<Eigen::Index>(y.m() * y.n(), y.t()));
        for (int k = 1; k <= std::min(kmax, 8); ++k) {
            MethodSpec spec;
            spec.name = name;
            spec.pca_k = k;
            consider(std::move(spec));
        }
    } else if (name == "hosvd") {
        for (int r1 = 1; r1 <= std::min(y.m(), 3); ++r1)
            for (int r2 = 1; r2 <= std::min(y.n(), 3); ++r2)
                for (int r3 : {1, 2, 3, 4, 6, 8}) {
                    if (r3 > y.t()) continue;
                    MethodSpec spec;
                    spec.name = name;
                    spec.hosvd_ranks = {r1, r2, r3};
                    consider(std::move(spec));
                }
    } else if (name == "cp-als") {
        for (int r = 1; r <= 8; ++r) {
            MethodSpec spec;
            spec.name = name;
            spec.cp_rank = r;
            consider(std::move(spec));
        }
    } else if (name == "rpca") {
        const double base = 1.0 / std::sqrt(double(std::max<std::int64_t>(
                                std::int64_t(y.m()) * y.n(), y.t())));
        for (double mult : {0.25, 0.5, 1.0, 2.0, 4.0}) {
            MethodSpec spec;
            spec.name = name;
            spec.rpca_lambda = base * mult;
            consider(std::move(spec));
        }
    } else if (name == "wavelet") {
        for (int levels : {3, 4, 5, 6}) {
            if (y.t() < (1 << levels)) continue;
            MethodSpec spec;
            spec.name = name;
            spec.wavelet_levels = levels;
            consider(std::move(spec));
        }
    }
    // Methods without a grid (vb-tucker, brtf-cp, bipolar) keep defaults.
    return best;
}

}  // namespace ehg
