#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/SVD>
#include <cmath>
#include <random>

#include "doctest.h"
#include "ehg/baselines.hpp"

using namespace ehg;

namespace {

Tensor3 random_tensor(int m, int n, int t, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, scale);
    Tensor3 x(m, n, t);
    for (Eigen::Index i = 0; i < x.data().size(); ++i) x.data()[i] = nd(gen);
    return x;
}

Tensor3 random_lowrank(int m, int n, int t, RankTriple r, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    auto randmat = [&](int rows, int cols) {
        Matrix a(rows, cols);
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(gen);
        return a;
    };
    Tensor3 core(r.r1, r.r2, r.r3);
    for (Eigen::Index i = 0; i < core.data().size(); ++i) core.data()[i] = nd(gen);
    return tucker_reconstruct(core, randmat(m, r.r1), randmat(n, r.r2), randmat(t, r.r3));
}

// Electrodes-by-time matrix: row index i + m*j, column index k.
Matrix electrode_matrix(const Tensor3& y) { return unfold(y, 3).transpose(); }

void check_split(const BaselineOutput& out, const Tensor3& y) {
    const Tensor3 sum = out.localized + out.distributed;
    REQUIRE(sum.dims() == y.dims());
    CHECK((sum.data() - y.data()).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(1.0, y.data().cwiseAbs().maxCoeff()));
}

}  // namespace

TEST_CASE("bipolar differences adjacent rows and passes the data through") {
    Tensor3 y(3, 2, 5);
    for (Eigen::Index i = 0; i < y.data().size(); ++i) y.data()[i] = double(i * i % 17);
    BaselineOutput out = bipolar(y);
    REQUIRE(out.localized.dims() == Dims3{2, 2, 5});
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 5; ++k)
                REQUIRE(out.localized(i, j, k) == y(i + 1, j, k) - y(i, j, k));
    CHECK((out.distributed.data() - y.data()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("full-rank pca leaves no residual") {
    const Tensor3 y = random_tensor(2, 2, 60, 1);
    BaselineOutput out = pca_lowrank(y, 4);
    check_split(out, y);
    CHECK(frobenius_norm(out.localized) < 1e-9 * frobenius_norm(y));
}

TEST_CASE("pca residual energy equals the discarded singular values") {
    const Tensor3 y = random_tensor(4, 4, 120, 2);
    const Matrix a = electrode_matrix(y);
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    for (int k : {1, 3, 7}) {
        BaselineOutput out = pca_lowrank(y, k);
        check_split(out, y);
        const double want = svd.singularValues().tail(svd.singularValues().size() - k)
                                .squaredNorm();
        const double got = out.localized.data().squaredNorm();
        CHECK(got == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("pca captures a rank-one electrode pattern exactly") {
    Tensor3 y(2, 2, 50);
    const double w[4] = {1.0, -2.0, 0.5, 3.0};
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 50; ++k) y(i, j, k) = w[i + 2 * j] * std::sin(0.1 * k);
    BaselineOutput out = pca_lowrank(y, 1);
    CHECK(frobenius_norm(out.localized) < 1e-9 * frobenius_norm(y));
    CHECK(frobenius_norm(out.distributed - y) < 1e-9 * frobenius_norm(y));
}

TEST_CASE("hosvd at full rank reproduces the tensor") {
    const Tensor3 y = random_tensor(3, 3, 40, 3);
    BaselineOutput out = hosvd(y, {3, 3, 40});
    check_split(out, y);
    CHECK(frobenius_norm(out.localized) < 1e-9 * frobenius_norm(y));
}

TEST_CASE("hosvd recovers an exactly low-rank tensor") {
    const Tensor3 y = random_lowrank(4, 4, 100, {2, 2, 3}, 4);
    BaselineOutput out = hosvd(y, {2, 2, 3});
    CHECK(frobenius_norm(out.distributed - y) < 1e-9 * frobenius_norm(y));
}

TEST_CASE("hosvd truncation error obeys the discarded-spectrum bound") {
    const Tensor3 y = random_tensor(4, 4, 80, 5);
    const RankTriple r{2, 3, 10};
    BaselineOutput out = hosvd(y, r);
    double bound = 0.0;
    const int keep[3] = {r.r1, r.r2, r.r3};
    for (int mode = 1; mode <= 3; ++mode) {
        Eigen::JacobiSVD<Matrix> svd(unfold(y, mode));
        const auto sv = svd.singularValues();
        for (Eigen::Index i = keep[mode - 1]; i < sv.size(); ++i) bound += sv[i] * sv[i];
    }
    CHECK(out.localized.data().squaredNorm() <= bound * (1.0 + 1e-9));
}

TEST_CASE("cp-als fits a rank-one tensor to machine precision") {
    Tensor3 y(3, 3, 60);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 60; ++k)
                y(i, j, k) = (1.0 + i) * (2.0 - 0.5 * j) * std::cos(0.05 * k);
    BaselineOutput out = cp_als(y, 1, 200, 1e-12, 0);
    check_split(out, y);
    CHECK(frobenius_norm(out.localized) < 1e-8 * frobenius_norm(y));
}

TEST_CASE("cp-als is seed-deterministic and never worsens with rank headroom") {
    const Tensor3 y = random_lowrank(3, 3, 80, {2, 2, 2}, 6);
    BaselineOutput a = cp_als(y, 3, 150, 1e-10, 7);
    BaselineOutput b = cp_als(y, 3, 150, 1e-10, 7);
    CHECK((a.distributed.data() - b.distributed.data()).cwiseAbs().maxCoeff() == 0.0);
    check_split(a, y);
    CHECK(frobenius_norm(a.localized) < 0.5 * frobenius_norm(y));
}

namespace {

// Rank-2 space-time matrix with flat singular vectors: every entry of
// U V^T stays well below the principal-component-pursuit weight
// 1/sqrt(200) ~ 0.071, which is the exact-recovery regime. Gaussian
// factors on a 16-electrode side are too spiky for that guarantee.
Tensor3 incoherent_lowrank(int T) {
    Tensor3 low(4, 4, T);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < T; ++k) {
                const double e = 2.0 * pi * double(i + 4 * j) / 16.0;
                const double t = 2.0 * pi * 3.0 * double(k) / double(T);
                low(i, j, k) = 3.0 * std::cos(e - t);
            }
    return low;
}

}  // namespace

TEST_CASE("rpca separates a low-rank background from sparse spikes") {
    const Tensor3 low = incoherent_lowrank(200);
    Tensor3 sparse(4, 4, 200);
    std::mt19937_64 gen(9);
    std::uniform_int_distribution<Eigen::Index> pick(0, low.data().size() - 1);
    std::bernoulli_distribution flip;
    const double amp = 8.0 * std::sqrt(low.data().squaredNorm() / double(low.count()));
    for (int c = 0; c < 32; ++c) sparse.data()[pick(gen)] = flip(gen) ? amp : -amp;
    const Tensor3 y = low + sparse;
    BaselineOutput out = rpca(y, -1.0, 1e-9, 2000);
    check_split(out, y);
    CHECK(frobenius_norm(out.distributed - low) < 1e-5 * frobenius_norm(low));
    CHECK(frobenius_norm(out.localized - sparse) < 1e-5 * frobenius_norm(low));
}

TEST_CASE("rpca on a clean low-rank tensor leaves the sparse part empty") {
    const Tensor3 y = incoherent_lowrank(150);
    BaselineOutput out = rpca(y, -1.0, 1e-9, 2000);
    CHECK(frobenius_norm(out.localized) < 1e-6 * frobenius_norm(y));
}

TEST_CASE("soft threshold shrinks toward zero") {
    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(-3.0, 1.0) == -2.0);
    CHECK(soft_threshold(0.5, 1.0) == 0.0);
    CHECK(soft_threshold(-0.5, 1.0) == 0.0);
    CHECK(soft_threshold(2.0, 0.0) == 2.0);
}

TEST_CASE("the bayesian cp baseline recovers a clean cp tensor") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> nd;
    Matrix u1(4, 2), u2(4, 2), u3(300, 2);
    for (auto* m : {&u1, &u2, &u3})
        for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = nd(gen);
    Tensor3 y(4, 4, 300);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 300; ++k)
                for (int r = 0; r < 2; ++r) y(i, j, k) += u1(i, r) * u2(j, r) * u3(k, r);
    RunOptions opts;
    opts.max_iters = 200;
    BaselineOutput out = brtf_cp(y, opts, Priors{});
    // Unlike the matrix baselines, this method keeps an explicit noise part:
    // localized + distributed differs from y by the (here tiny) residual.
    const Tensor3 resid = y - (out.localized + out.distributed);
    CHECK(frobenius_norm(resid) < 1e-3 * frobenius_norm(y));
    CHECK(frobenius_norm(out.distributed - y) < 1e-3 * frobenius_norm(y));
    CHECK(frobenius_norm(out.localized) < 1e-3 * frobenius_norm(y));
}

TEST_CASE("wavelet shrinkage keeps smooth structure and removes noise") {
    const int T = 1024;
    Tensor3 smooth(1, 1, T), noise(1, 1, T);
    std::mt19937_64 gen(12);
    std::normal_distribution<double> nd(0.0, 0.1);
    for (int k = 0; k < T; ++k) {
        smooth(0, 0, k) = std::sin(2.0 * std::acos(-1.0) * 4.0 * k / T);
        noise(0, 0, k) = nd(gen);
    }
    const Tensor3 y = smooth + noise;
    BaselineOutput out = wavelet_denoise(y, 5);
    check_split(out, y);
    CHECK(frobenius_norm(out.localized - smooth) < 0.25 * frobenius_norm(smooth));

    // The approximation band is never thresholded, so white noise keeps
    // about sqrt(2^-levels) ~ 0.18 of its norm; the shrunk details add a
    // little on top.
    BaselineOutput pure = wavelet_denoise(noise, 5);
    CHECK(frobenius_norm(pure.localized) < 0.25 * frobenius_norm(noise));
}

TEST_CASE("a zero threshold makes wavelet shrinkage the identity") {
    const Tensor3 y = random_tensor(2, 2, 512, 13);
    BaselineOutput out = wavelet_denoise(y, 4, 0.0);
    CHECK(frobenius_norm(out.localized - y) < 1e-10 * frobenius_norm(y));
    CHECK(frobenius_norm(out.distributed) < 1e-10 * frobenius_norm(y));
}
