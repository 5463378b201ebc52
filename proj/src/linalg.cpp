#include "ehg/linalg.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ehg/errors.hpp"

namespace ehg {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index ia = 0; ia < a.rows(); ++ia)
        for (Eigen::Index ja = 0; ja < a.cols(); ++ja)
            out.block(ia * b.rows(), ja * b.cols(), b.rows(), b.cols()) = a(ia, ja) * b;
    return out;
}

SpdInverse spd_inverse(Matrix a, const char* context) {
    const Eigen::Index d = a.rows();
    for (int attempt = 0; attempt < 2; ++attempt) {
        Eigen::LLT<Matrix> llt(a);
        if (llt.info() == Eigen::Success) {
            const Matrix l = llt.matrixL();
            double log_det = 0.0;
            bool ok = true;
            for (Eigen::Index i = 0; i < d; ++i) {
                if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) {
                    ok = false;
                    break;
                }
                log_det += std::log(l(i, i));
            }
            if (ok) {
                Matrix inv = llt.solve(Matrix::Identity(d, d));
                // Symmetrize: solve() output carries tiny asymmetry.
                inv = 0.5 * (inv + inv.transpose()).eval();
                return {std::move(inv), -2.0 * log_det};
            }
        }
        a.diagonal().array() += 1e-10 * a.trace() / double(d);
    }
    throw NumericalError(std::string("covariance update lost positive definiteness in ") +
                         context);
}

ThinSvd thin_svd(const Matrix& a) {
    const Eigen::Index k = std::min(a.rows(), a.cols());
    ThinSvd out;
    out.u = Matrix(a.rows(), k);
    out.v = Matrix(a.cols(), k);
    out.values = Vector(k);
    if (a.rows() <= a.cols()) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a * a.transpose());
        for (Eigen::Index i = 0; i < k; ++i) {
            const Eigen::Index src = k - 1 - i;  // eigenvalues come ascending
            out.u.col(i) = es.eigenvectors().col(src);
            out.values[i] = std::sqrt(std::max(es.eigenvalues()[src], 0.0));
            if (out.values[i] > 0.0)
                out.v.col(i) = a.transpose() * out.u.col(i) / out.values[i];
            else
                out.v.col(i).setZero();
        }
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a.transpose() * a);
        for (Eigen::Index i = 0; i < k; ++i) {
            const Eigen::Index src = k - 1 - i;
            out.v.col(i) = es.eigenvectors().col(src);
            out.values[i] = std::sqrt(std::max(es.eigenvalues()[src], 0.0));
            if (out.values[i] > 0.0)
                out.u.col(i) = a * out.v.col(i) / out.values[i];
            else
                out.u.col(i).setZero();
        }
    }
    for (Eigen::Index c = 0; c < k; ++c) {
        Eigen::Index imax = 0;
        out.u.col(c).cwiseAbs().maxCoeff(&imax);
        if (out.u(imax, c) < 0.0) {
            out.u.col(c) = -out.u.col(c);
            out.v.col(c) = -out.v.col(c);
        }
    }
    return out;
}

ModeSvd mode_svd(const Tensor3& x, int mode, int r) {
    const int size_n = x.dims().size(mode);
    if (r < 1 || r > size_n) throw ArgumentError("mode_svd: rank out of range for mode");
    ThinSvd svd = thin_svd(unfold(x, mode));
    // The unfolding has only min(rows, cols) singular directions; requests
    // beyond that get zero columns (they carry no energy by construction).
    Matrix u = Matrix::Zero(size_n, r);
    const Eigen::Index copy = std::min<Eigen::Index>(r, svd.u.cols());
    u.leftCols(copy) = svd.u.leftCols(copy);
    return {std::move(u), std::move(svd.values)};
}

RobustScale robust_scale(const Vector& data) {
    if (data.size() == 0) return {0.0, 0.0};
    std::vector<double> work(data.data(), data.data() + data.size());
    const std::size_t mid = work.size() / 2;
    std::nth_element(work.begin(), work.begin() + std::ptrdiff_t(mid), work.end());
    const double median = work[mid];
    for (std::size_t i = 0; i < work.size(); ++i) work[i] = std::abs(work[i] - median);
    std::nth_element(work.begin(), work.begin() + std::ptrdiff_t(mid), work.end());
    return {median, work[mid] / 0.6745};
}

Vector robust_outlier_seed(const Vector& data) {
    const Eigen::Index n = data.size();
    Vector seed = Vector::Zero(n);
    if (n == 0) return seed;
    const RobustScale sc = robust_scale(data);
    const double cut = 5.0 * sc.sigma;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = data[i] - sc.median;
        if (std::abs(d) > cut) seed[i] = d;
    }
    return seed;
}

Hosvd truncated_hosvd(const Tensor3& x, int r1, int r2, int r3) {
    Hosvd h;
    h.u1 = mode_svd(x, 1, r1).vectors;
    h.u2 = mode_svd(x, 2, r2).vectors;
    h.u3 = mode_svd(x, 3, r3).vectors;
    h.core = mode_product(mode_product(mode_product(x, h.u1.transpose(), 1), h.u2.transpose(), 2),
                          h.u3.transpose(), 3);
    return h;
}

}  // namespace ehg
