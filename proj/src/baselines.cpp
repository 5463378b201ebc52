#include "ehg/baselines.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ehg/errors.hpp"
#include "ehg/linalg.hpp"
#include "ehg/rng.hpp"
#include "ehg/vb_cp.hpp"

namespace ehg {

namespace {

// (m*n) x T electrodes-by-time arrangement shared by the matrix baselines.
Matrix space_time_matrix(const Tensor3& y) { return unfold(y, 3).transpose(); }

Tensor3 from_space_time(const Matrix& a, const Dims3& dims) {
    return fold(a.transpose(), 3, dims);
}

Matrix khatri_rao(const Matrix& fast, const Matrix& slow) {
    Matrix out(fast.rows() * slow.rows(), fast.cols());
    for (Eigen::Index r = 0; r < fast.cols(); ++r)
        for (Eigen::Index k = 0; k < slow.rows(); ++k)
            out.col(r).segment(k * fast.rows(), fast.rows()) = slow(k, r) * fast.col(r);
    return out;
}

// --- Daubechies-4 periodized DWT -----------------------------------------

const double kDb4H[4] = {
    0.48296291314469025, 0.83651630373746899, 0.22414386804185735, -0.12940952255092145};
const double kDb4G[4] = {
    -0.12940952255092145, -0.22414386804185735, 0.83651630373746899, -0.48296291314469025};

void dwt_step(const std::vector<double>& x, std::vector<double>& approx,
              std::vector<double>& detail) {
    const std::size_t half = x.size() / 2;
    approx.resize(half);
    detail.resize(half);
    for (std::size_t i = 0; i < half; ++i) {
        double a = 0.0, d = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double v = x[(2 * i + std::size_t(k)) % x.size()];
            a += kDb4H[k] * v;
            d += kDb4G[k] * v;
        }
        approx[i] = a;
        detail[i] = d;
    }
}

std::vector<double> idwt_step(const std::vector<double>& approx,
                              const std::vector<double>& detail) {
    const std::size_t half = approx.size();
    std::vector<double> x(2 * half, 0.0);
    for (std::size_t i = 0; i < half; ++i)
        for (int k = 0; k < 4; ++k) {
            const std::size_t j = (2 * i + std::size_t(k)) % (2 * half);
            x[j] += kDb4H[k] * approx[i] + kDb4G[k] * detail[i];
        }
    return x;
}

double median_abs(std::vector<double> v) {
    if (v.empty()) return 0.0;
    for (double& x : v) x = std::abs(x);
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 0) {
        const double lo = *std::max_element(v.begin(), v.begin() + std::ptrdiff_t(mid));
        return 0.5 * (lo + hi);
    }
    return hi;
}

std::vector<double> wavelet_denoise_series(const std::vector<double>& x, int levels,
                                           std::optional<double> threshold_override) {
    const std::size_t T = x.size();
    const std::size_t block = std::size_t(1) << levels;
    const std::size_t padded = (T + block - 1) / block * block;

    std::vector<double> buf(x);
    buf.resize(padded);
    for (std::size_t i = T; i < padded; ++i)  // edge reflection
        buf[i] = x[T >= 2 ? T - 2 - std::min(i - T, T - 2) : 0];

    const std::size_t n_levels = std::size_t(levels);
    std::vector<std::vector<double>> details(n_levels);
    std::vector<double> approx = buf, next, det;
    for (int l = 0; l < levels; ++l) {
        dwt_step(approx, next, det);
        details[std::size_t(l)] = std::move(det);
        approx = std::move(next);
    }

    double threshold;
    if (threshold_override) {
        threshold = *threshold_override;
    } else {
        const double sigma = median_abs(details[0]) / 0.6745;
        threshold = sigma * std::sqrt(2.0 * std::log(double(T)));
    }
    for (auto& d : details)
        for (double& c : d) c = soft_threshold(c, threshold);

    for (int l = levels - 1; l >= 0; --l) approx = idwt_step(approx, details[std::size_t(l)]);
    approx.resize(T);
    return approx;
}

}  // namespace

double soft_threshold(double v, double threshold) {
    if (v > threshold) return v - threshold;
    if (v < -threshold) return v + threshold;
    return 0.0;
}

BaselineOutput bipolar(const Tensor3& y) {
    if (y.m() < 2) throw ArgumentError("bipolar: need at least two electrode rows");
    Tensor3 diff(y.m() - 1, y.n(), y.t());
    for (int k = 0; k < y.t(); ++k)
        for (int j = 0; j < y.n(); ++j)
            for (int i = 0; i + 1 < y.m(); ++i) diff(i, j, k) = y(i + 1, j, k) - y(i, j, k);
    return {std::move(diff), y, {}};
}

BaselineOutput pca_lowrank(const Tensor3& y, int k) {
    const Matrix a = space_time_matrix(y);
    const Eigen::Index kmax = std::min(a.rows(), a.cols());
    if (k < 1 || k > kmax) throw ArgumentError("pca_lowrank: k out of range");
    const ThinSvd svd = thin_svd(a);
    const Matrix approx = svd.u.leftCols(k) * svd.values.head(k).asDiagonal() *
                          svd.v.leftCols(k).transpose();
    Tensor3 distributed = from_space_time(approx, y.dims());
    Tensor3 localized = y - distributed;
    BaselineOutput out{std::move(localized), std::move(distributed), {}};
    out.diagnostics["k"] = double(k);
    out.diagnostics["discarded_sq"] = svd.values.tail(kmax - k).squaredNorm();
    return out;
}

BaselineOutput hosvd(const Tensor3& y, const RankTriple& ranks) {
    if (ranks.r1 < 1 || ranks.r1 > y.m() || ranks.r2 < 1 || ranks.r2 > y.n() ||
        ranks.r3 < 1 || ranks.r3 > y.t())
        throw ArgumentError("hosvd: rank bound violation");
    const Hosvd h = truncated_hosvd(y, ranks.r1, ranks.r2, ranks.r3);
    Tensor3 distributed = tucker_reconstruct(h.core, h.u1, h.u2, h.u3);
    Tensor3 localized = y - distributed;
    return {std::move(localized), std::move(distributed), {}};
}

BaselineOutput cp_als(const Tensor3& y, int rank, int max_iters, double tol,
                      std::uint64_t seed) {
    if (rank < 1) throw ArgumentError("cp_als: rank must be >= 1");
    const int I[3] = {y.m(), y.n(), y.t()};
    GaussianStream g(seed);
    std::array<Matrix, 3> f;
    for (int n = 0; n < 3; ++n) {
        f[std::size_t(n)] = Matrix(I[n], rank);
        for (int r = 0; r < rank; ++r)
            for (int i = 0; i < I[n]; ++i) f[std::size_t(n)](i, r) = g.next();
    }

    const double y_norm = y.data().norm();
    double fit = 0.0;
    bool ridge_used = false;
    int iters = 0;
    for (; iters < max_iters; ++iters) {
        for (int n = 0; n < 3; ++n) {
            const int n1 = (n + 1) % 3, n2 = (n + 2) % 3;
            const Matrix eb = khatri_rao(f[std::size_t(n1)], f[std::size_t(n2)]);
            Matrix w = (f[std::size_t(n1)].transpose() * f[std::size_t(n1)])
                           .cwiseProduct(f[std::size_t(n2)].transpose() * f[std::size_t(n2)]);
            Eigen::LLT<Matrix> llt(w);
            if (llt.info() != Eigen::Success) {
                w.diagonal().array() += 1e-10 * std::max(w.trace(), 1.0);
                llt.compute(w);
                ridge_used = true;
                if (llt.info() != Eigen::Success)
                    throw NumericalError("cp_als: normal equations not solvable");
            }
            f[std::size_t(n)] = llt.solve((unfold(y, n + 1) * eb).transpose()).transpose();
        }
        const Matrix b3 = khatri_rao(f[0], f[1]);
        const double resid = (unfold(y, 3) - f[2] * b3.transpose()).norm();
        const double new_fit = y_norm > 0.0 ? 1.0 - resid / y_norm : 1.0;
        if (iters > 0 && std::abs(new_fit - fit) < tol) {
            fit = new_fit;
            ++iters;
            break;
        }
        fit = new_fit;
    }

    const Matrix b3 = khatri_rao(f[0], f[1]);
    Tensor3 distributed = fold(f[2] * b3.transpose(), 3, y.dims());
    Tensor3 localized = y - distributed;
    BaselineOutput out{std::move(localized), std::move(distributed), {}};
    out.diagnostics["fit"] = fit;
    out.diagnostics["iterations"] = double(iters);
    out.diagnostics["ridge_used"] = ridge_used ? 1.0 : 0.0;
    return out;
}

BaselineOutput rpca(const Tensor3& y, double lambda, double tol, int max_iters) {
    const Matrix d = space_time_matrix(y);
    const double d_norm = d.norm();
    if (d_norm == 0.0) return {Tensor3(y.dims(), Vector::Zero(y.count())), y * 0.0, {}};
    if (lambda <= 0.0) lambda = 1.0 / std::sqrt(double(std::max(d.rows(), d.cols())));

    const double spec_norm = thin_svd(d).values[0];
    const double inf_norm = d.cwiseAbs().maxCoeff();
    Matrix dual = d / std::max(spec_norm, inf_norm / lambda);
    double mu = 1.25 / spec_norm;
    const double mu_max = mu * 1e7;
    const double rho = 1.5;

    Matrix low = Matrix::Zero(d.rows(), d.cols());
    Matrix sparse = Matrix::Zero(d.rows(), d.cols());
    bool converged = false;
    int iters = 0;
    for (; iters < max_iters; ++iters) {
        const ThinSvd svd = thin_svd(d - sparse + dual / mu);
        Vector sv = svd.values;
        for (Eigen::Index i = 0; i < sv.size(); ++i) sv[i] = soft_threshold(sv[i], 1.0 / mu);
        low = svd.u * sv.asDiagonal() * svd.v.transpose();
        sparse = (d - low + dual / mu)
                     .unaryExpr([&](double v) { return soft_threshold(v, lambda / mu); });
        const Matrix z = d - low - sparse;
        dual += mu * z;
        mu = std::min(mu * rho, mu_max);
        if (z.norm() / d_norm < tol) {
            converged = true;
            ++iters;
            break;
        }
    }

    // Residual is folded into the sparse side so the parts sum to y exactly.
    Tensor3 distributed = from_space_time(low, y.dims());
    Tensor3 localized = y - distributed;
    BaselineOutput out{std::move(localized), std::move(distributed), {}};
    out.diagnostics["lambda"] = lambda;
    out.diagnostics["iterations"] = double(iters);
    out.diagnostics["converged"] = converged ? 1.0 : 0.0;
    out.diagnostics["residual_rel"] = (d - low - sparse).norm() / d_norm;
    return out;
}

BaselineOutput brtf_cp(const Tensor3& y, const RunOptions& opts, const Priors& priors) {
    const RankTriple resolved = resolve_init_rank(y.dims(), opts.init_rank);
    const int rank = std::max({resolved.r1, resolved.r2, resolved.r3});
    const DecompositionResult res = run_cp(y, priors, opts, rank);
    // Like the main method, BRTF separates an explicit noise tensor:
    // localized + distributed + noise == y, with the noise norm reported in
    // the diagnostics.
    BaselineOutput out{res.s, res.x, {}};
    out.diagnostics["noise_norm"] = frobenius_norm(res.e);
    out.diagnostics["rank"] = double(res.multilinear_rank.r1);
    out.diagnostics["iterations"] = double(res.iterations);
    out.diagnostics["converged"] = res.converged ? 1.0 : 0.0;
    out.diagnostics["noise_precision"] = res.noise_precision;
    return out;
}

BaselineOutput wavelet_denoise(const Tensor3& y, int levels,
                               std::optional<double> threshold_override) {
    if (levels < 1) throw ArgumentError("wavelet_denoise: levels must be >= 1");
    if (y.t() < (1 << levels))
        throw ArgumentError("wavelet_denoise: series too short for requested levels");
    Tensor3 localized(y.m(), y.n(), y.t());
    std::vector<double> series(std::size_t(y.t()));
    for (int j = 0; j < y.n(); ++j)
        for (int i = 0; i < y.m(); ++i) {
            for (int k = 0; k < y.t(); ++k) series[std::size_t(k)] = y(i, j, k);
            const auto den = wavelet_denoise_series(series, levels, threshold_override);
            for (int k = 0; k < y.t(); ++k) localized(i, j, k) = den[std::size_t(k)];
        }
    Tensor3 distributed = y - localized;
    return {std::move(localized), std::move(distributed), {}};
}

}  // namespace ehg
