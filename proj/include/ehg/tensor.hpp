#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ehg/errors.hpp"

namespace ehg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dims3 {
    int m = 0;
    int n = 0;
    int t = 0;

    bool operator==(const Dims3&) const = default;
    std::int64_t count() const { return std::int64_t(m) * n * t; }
    int size(int mode) const;  // mode in {1,2,3}
};

// Dense 3-way tensor. Storage is mode-1 fastest: entry (i,j,k) lives at
// data[i + m*(j + n*k)], so unfold(.,1) is a plain reshape.
class Tensor3 {
  public:
    Tensor3() = default;
    Tensor3(int m, int n, int t);
    Tensor3(Dims3 dims, Vector data);

    static Tensor3 zeros(int m, int n, int t) { return Tensor3(m, n, t); }

    const Dims3& dims() const { return dims_; }
    int m() const { return dims_.m; }
    int n() const { return dims_.n; }
    int t() const { return dims_.t; }
    std::int64_t count() const { return dims_.count(); }

    double operator()(int i, int j, int k) const {
        return data_[i + std::int64_t(dims_.m) * (j + std::int64_t(dims_.n) * k)];
    }
    double& operator()(int i, int j, int k) {
        return data_[i + std::int64_t(dims_.m) * (j + std::int64_t(dims_.n) * k)];
    }

    const Vector& data() const { return data_; }
    Vector& data() { return data_; }

    Tensor3 operator+(const Tensor3& o) const;
    Tensor3 operator-(const Tensor3& o) const;
    Tensor3 operator*(double c) const;

  private:
    Dims3 dims_{};
    Vector data_;
};

// Mode-n unfolding with cyclic column ordering: for mode n, the column
// index enumerates (i_{n+1}, i_{n+2}) with i_{n+1} fastest, indices cyclic
// mod 3. Concretely:
//   mode 1: m x (n*t), col = j + n*k
//   mode 2: n x (t*m), col = k + t*i
//   mode 3: t x (m*n), col = i + m*j
// Under this convention X_(n) = U_n G_(n) (U_{n+2} kron U_{n+1})^T for a
// Tucker tensor X = G x1 U1 x2 U2 x3 U3.
Matrix unfold(const Tensor3& x, int mode);

// Exact inverse of unfold with the same convention.
Tensor3 fold(const Matrix& a, int mode, Dims3 dims);

// G x_n U: contracts mode n of x with the columns of u.
Tensor3 mode_product(const Tensor3& x, const Matrix& u, int mode);

Tensor3 tucker_reconstruct(const Tensor3& core, const Matrix& u1, const Matrix& u2,
                           const Matrix& u3);

double frobenius_norm(const Tensor3& x);

}  // namespace ehg
