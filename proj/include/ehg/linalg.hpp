#pragma once

#include <vector>

#include "ehg/tensor.hpp"

namespace ehg {

// kron(A, B) with the B index fastest: out[iB + rowsB*iA, jB + colsB*jA].
Matrix kron(const Matrix& a, const Matrix& b);

// Inverts a symmetric positive definite matrix by Cholesky; if the
// factorization fails, adds 1e-10 * trace/dim to the diagonal once and
// retries, then throws NumericalError. Also returns log det of the inverse.
struct SpdInverse {
    Matrix inverse;
    double log_det_inverse;
};
SpdInverse spd_inverse(Matrix a, const char* context);

// Thin SVD a = U diag(values) V^T computed through the symmetric
// eigenproblem of the smaller Gram matrix. The matrices decomposed in this
// library are short-and-wide or tall-and-thin with a tiny small side, so
// this is far cheaper than a rectangular SVD and sidesteps Eigen's large
// rectangular SVD workspaces. Column signs are fixed (largest-magnitude
// entry of each left vector positive) so results are deterministic.
struct ThinSvd {
    Matrix u;       // rows x k
    Vector values;  // k = min(rows, cols), descending
    Matrix v;       // cols x k
};
ThinSvd thin_svd(const Matrix& a);

// Leading left singular vectors (and singular values) of the mode-n
// unfolding, with thin_svd's sign canonicalization.
struct ModeSvd {
    Matrix vectors;  // size_n x r
    Vector values;   // min(rows, cols), all of them
};
ModeSvd mode_svd(const Tensor3& x, int mode, int r);

// Median and robust standard deviation (MAD / 0.6745).
struct RobustScale {
    double median;
    double sigma;
};
RobustScale robust_scale(const Vector& data);

// Robust outlier screen: entries whose deviation from the median exceeds
// five robust standard deviations (MAD / 0.6745) are returned as their
// deviation from the median; all other entries are zero. When the MAD is
// zero (majority-constant data) any nonzero deviation counts as an outlier.
Vector robust_outlier_seed(const Vector& data);

// Truncated higher-order SVD: factors from mode_svd, core by projection.
struct Hosvd {
    Matrix u1, u2, u3;
    Tensor3 core;
};
Hosvd truncated_hosvd(const Tensor3& x, int r1, int r2, int r3);

}  // namespace ehg
