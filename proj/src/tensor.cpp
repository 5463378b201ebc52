#include "ehg/tensor.hpp"

#include <cmath>

namespace ehg {

int Dims3::size(int mode) const {
    switch (mode) {
        case 1: return m;
        case 2: return n;
        case 3: return t;
        default: throw ArgumentError("mode must be 1, 2, or 3");
    }
}

Tensor3::Tensor3(int m, int n, int t) : dims_{m, n, t} {
    if (m < 0 || n < 0 || t < 0) throw ArgumentError("tensor dims must be nonnegative");
    data_ = Vector::Zero(dims_.count());
}

Tensor3::Tensor3(Dims3 dims, Vector data) : dims_(dims), data_(std::move(data)) {
    if (data_.size() != dims_.count())
        throw ArgumentError("tensor data length does not match dims");
}

Tensor3 Tensor3::operator+(const Tensor3& o) const {
    if (!(dims_ == o.dims_)) throw ArgumentError("tensor dims mismatch in +");
    return Tensor3(dims_, data_ + o.data_);
}

Tensor3 Tensor3::operator-(const Tensor3& o) const {
    if (!(dims_ == o.dims_)) throw ArgumentError("tensor dims mismatch in -");
    return Tensor3(dims_, data_ - o.data_);
}

Tensor3 Tensor3::operator*(double c) const { return Tensor3(dims_, data_ * c); }

Matrix unfold(const Tensor3& x, int mode) {
    const int m = x.m(), n = x.n(), t = x.t();
    switch (mode) {
        case 1:
            // Reshape: storage is already (i fastest, then j, then k).
            return Eigen::Map<const Matrix>(x.data().data(), m, std::int64_t(n) * t);
        case 2: {
            Matrix a(n, std::int64_t(t) * m);
            for (int i = 0; i < m; ++i)
                for (int k = 0; k < t; ++k)
                    for (int j = 0; j < n; ++j) a(j, k + std::int64_t(t) * i) = x(i, j, k);
            return a;
        }
        case 3: {
            Matrix a(t, std::int64_t(m) * n);
            for (int k = 0; k < t; ++k)
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < m; ++i) a(k, i + std::int64_t(m) * j) = x(i, j, k);
            return a;
        }
        default:
            throw ArgumentError("unfold: mode must be 1, 2, or 3");
    }
}

Tensor3 fold(const Matrix& a, int mode, Dims3 dims) {
    const int m = dims.m, n = dims.n, t = dims.t;
    auto check = [&](int rows, std::int64_t cols) {
        if (a.rows() != rows || a.cols() != cols)
            throw ArgumentError("fold: matrix shape inconsistent with dims and mode");
    };
    Tensor3 x(m, n, t);
    switch (mode) {
        case 1:
            check(m, std::int64_t(n) * t);
            x.data() = Eigen::Map<const Vector>(a.data(), a.size());
            return x;
        case 2:
            check(n, std::int64_t(t) * m);
            for (int i = 0; i < m; ++i)
                for (int k = 0; k < t; ++k)
                    for (int j = 0; j < n; ++j) x(i, j, k) = a(j, k + std::int64_t(t) * i);
            return x;
        case 3:
            check(t, std::int64_t(m) * n);
            for (int k = 0; k < t; ++k)
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < m; ++i) x(i, j, k) = a(k, i + std::int64_t(m) * j);
            return x;
        default:
            throw ArgumentError("fold: mode must be 1, 2, or 3");
    }
}

Tensor3 mode_product(const Tensor3& x, const Matrix& u, int mode) {
    if (mode < 1 || mode > 3) throw ArgumentError("mode_product: mode must be 1, 2, or 3");
    if (u.cols() != x.dims().size(mode))
        throw ArgumentError("mode_product: matrix columns do not match tensor mode size");
    Dims3 nd = x.dims();
    switch (mode) {
        case 1: nd.m = int(u.rows()); break;
        case 2: nd.n = int(u.rows()); break;
        case 3: nd.t = int(u.rows()); break;
    }
    return fold(u * unfold(x, mode), mode, nd);
}

Tensor3 tucker_reconstruct(const Tensor3& core, const Matrix& u1, const Matrix& u2,
                           const Matrix& u3) {
    if (u1.cols() != core.m() || u2.cols() != core.n() || u3.cols() != core.t())
        throw ArgumentError("tucker_reconstruct: factor columns do not match core dims");
    return mode_product(mode_product(mode_product(core, u1, 1), u2, 2), u3, 3);
}

double frobenius_norm(const Tensor3& x) { return x.data().norm(); }

}  // namespace ehg
