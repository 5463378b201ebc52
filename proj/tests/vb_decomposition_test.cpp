#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "ehg/simulator.hpp"
#include "ehg/vb_cp.hpp"
#include "ehg/vb_decomposition.hpp"

using namespace ehg;

namespace {

Tensor3 random_tensor(int m, int n, int t, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, scale);
    Tensor3 x(m, n, t);
    for (Eigen::Index i = 0; i < x.data().size(); ++i) x.data()[i] = nd(gen);
    return x;
}

// Random Tucker tensor of a given multilinear rank.
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

// Largest relative ELBO decrease between consecutive iterations, skipping
// the steps right after a rank prune (the variational family shrinks there).
double worst_elbo_drop(const std::vector<double>& trace, const std::vector<int>& prunes) {
    double worst = 0.0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        bool after_prune = false;
        for (int p : prunes)
            if (std::size_t(p) == i - 1) after_prune = true;
        if (after_prune) continue;
        const double drop = (trace[i - 1] - trace[i]) / std::max(1.0, std::abs(trace[i - 1]));
        worst = std::max(worst, drop);
    }
    return worst;
}

}  // namespace

TEST_CASE("initial rank resolution clamps to mode sizes and caps") {
    // The mode-3 default cap is 32, but the rank along a mode can never
    // exceed the product of the other mode sizes (here 16).
    CHECK(resolve_init_rank({4, 4, 6000}, {0, 0, 0}) == RankTriple{4, 4, 16});
    CHECK(resolve_init_rank({4, 4, 6000}, {2, 3, 8}) == RankTriple{2, 3, 8});
    CHECK(resolve_init_rank({2, 2, 10}, {0, 0, 0}) == RankTriple{2, 2, 4});
    // A mode rank can never exceed the product of the other mode sizes.
    CHECK(resolve_init_rank({1, 1, 50}, {0, 0, 0}).r3 == 1);
}

TEST_CASE("default hyperpriors are replaced by data-scaled ones") {
    const Tensor3 y = random_tensor(3, 3, 100, 1, 2.0);
    const Priors r = resolve_priors(y, Priors{});
    const double var =
        (y.data().array() - y.data().mean()).square().sum() / double(y.count());
    CHECK(r.a_gamma == 1.0);
    CHECK(r.b_gamma == doctest::Approx(1e-4 * var).epsilon(1e-12));
    CHECK(r.a_tau == 1e-6);

    Priors custom;
    custom.a_gamma = 2.0;
    custom.b_gamma = 3.0;
    const Priors kept = resolve_priors(y, custom);
    CHECK(kept.a_gamma == 2.0);
    CHECK(kept.b_gamma == 3.0);
}

TEST_CASE("full-rank initialization reconstructs the data") {
    const Tensor3 y = random_tensor(3, 3, 40, 2);
    RunOptions opts;
    opts.init_rank = {3, 3, 40};
    opts.jitter_scale_rel = 0.0;
    PosteriorState st = initialize(y, resolve_priors(y, Priors{}), opts);
    // Mode 3 clamps to 3*3 = 9, which still spans any 3x3xT tensor exactly.
    REQUIRE(st.rank() == RankTriple{3, 3, 9});
    const Tensor3 x = st.x_mean();
    CHECK(frobenius_norm(x - y) < 1e-8 * frobenius_norm(y));
    // The sparse part starts at zero.
    CHECK(st.s_mean.data().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("initialization is seed-deterministic and jitter responds to the seed") {
    const Tensor3 y = random_tensor(3, 3, 40, 3);
    RunOptions opts;
    opts.seed = 5;
    PosteriorState a = initialize(y, resolve_priors(y, Priors{}), opts);
    PosteriorState b = initialize(y, resolve_priors(y, Priors{}), opts);
    CHECK((a.factor_mean[0] - b.factor_mean[0]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.core_mean.data() - b.core_mean.data()).cwiseAbs().maxCoeff() == 0.0);
    opts.seed = 6;
    PosteriorState c = initialize(y, resolve_priors(y, Priors{}), opts);
    CHECK((a.factor_mean[0] - c.factor_mean[0]).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("elbo increases monotonically on random data") {
    for (std::uint64_t seed : {0, 1, 2}) {
        const Tensor3 y = random_tensor(4, 3, 60, seed);
        RunOptions opts;
        opts.max_iters = 60;
        opts.seed = seed;
        DecompositionResult res = run(y, Priors{}, opts);
        REQUIRE(res.elbo_trace.size() >= 2);
        CHECK(worst_elbo_drop(res.elbo_trace, res.prune_events) <= 1e-8);
    }
}

TEST_CASE("run is deterministic for a fixed seed") {
    const Tensor3 y = random_tensor(3, 3, 80, 9);
    RunOptions opts;
    opts.max_iters = 30;
    opts.seed = 4;
    DecompositionResult a = run(y, Priors{}, opts);
    DecompositionResult b = run(y, Priors{}, opts);
    CHECK((a.s.data() - b.s.data()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.x.data() - b.x.data()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.elbo_trace == b.elbo_trace);
}

TEST_CASE("the three returned parts add back to the input exactly") {
    const Tensor3 y = random_tensor(4, 4, 100, 12);
    RunOptions opts;
    opts.max_iters = 25;
    DecompositionResult res = run(y, Priors{}, opts);
    const Tensor3 sum = (res.s + res.x) + res.e;
    CHECK((sum.data() - y.data()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pruning with an infinite threshold is a no-op") {
    const Tensor3 y = random_tensor(3, 3, 50, 7);
    RunOptions opts;
    PosteriorState st = initialize(y, resolve_priors(y, Priors{}), opts);
    st = vb_sweep(st, y, resolve_priors(y, Priors{}));
    const RankTriple before = st.rank();
    PosteriorState after = prune_ranks(st, std::numeric_limits<double>::infinity());
    CHECK(after.rank() == before);
    CHECK((after.core_mean.data() - st.core_mean.data()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(prune_ranks(st, 0.0), ArgumentError);
    CHECK_THROWS_AS(prune_ranks(st, -1.0), ArgumentError);
}

TEST_CASE("a noiseless low-rank tensor recovers its multilinear rank") {
    const RankTriple truth{2, 2, 3};
    const Tensor3 y = random_lowrank(4, 4, 200, truth, 21);
    RunOptions opts;
    opts.init_rank = {4, 4, 8};
    opts.max_iters = 200;
    DecompositionResult res = run(y, Priors{}, opts);
    CHECK(res.multilinear_rank == truth);
    CHECK(frobenius_norm(res.s) + frobenius_norm(res.e) < 1e-3 * frobenius_norm(y));
}

TEST_CASE("a rank-one noiseless tensor leaves almost nothing in the sparse part") {
    const Tensor3 y = random_lowrank(4, 4, 300, {1, 1, 1}, 31);
    RunOptions opts;
    opts.max_iters = 150;
    DecompositionResult res = run(y, Priors{}, opts);
    CHECK(res.multilinear_rank == RankTriple{1, 1, 1});
    CHECK(frobenius_norm(res.s) < 1e-6 * frobenius_norm(y));
    CHECK(frobenius_norm(res.x - y) < 1e-6 * frobenius_norm(y));
}

TEST_CASE("isolated large spikes land in the sparse part") {
    Tensor3 y = random_lowrank(4, 4, 300, {2, 2, 2}, 41);
    const double scale = std::sqrt(y.data().squaredNorm() / double(y.count()));
    Tensor3 s_true(4, 4, 300);
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<Eigen::Index> pick(0, y.data().size() - 1);
    for (int c = 0; c < 48; ++c) {  // 1% of entries
        const Eigen::Index at = pick(gen);
        s_true.data()[at] = 10.0 * scale;
    }
    y = y + s_true;
    RunOptions opts;
    opts.max_iters = 200;
    DecompositionResult res = run(y, Priors{}, opts);
    // Each spiked entry is attributed mostly to s.
    double worst = 0.0;
    for (Eigen::Index i = 0; i < y.data().size(); ++i)
        if (s_true.data()[i] != 0.0)
            worst = std::max(worst,
                             std::abs(res.s.data()[i] - s_true.data()[i]) / (10.0 * scale));
    CHECK(worst < 0.35);
    CHECK(frobenius_norm(res.s) > 0.5 * frobenius_norm(s_true));
}

TEST_CASE("pure noise collapses to rank one with a tiny sparse part") {
    const Tensor3 y = random_tensor(4, 4, 500, 55);
    RunOptions opts;
    opts.max_iters = 150;
    DecompositionResult res = run(y, Priors{}, opts);
    CHECK(res.multilinear_rank.r1 <= 2);
    CHECK(res.multilinear_rank.r2 <= 2);
    CHECK(res.multilinear_rank.r3 <= 2);
    CHECK(frobenius_norm(res.s) < 0.05 * frobenius_norm(y));
}

TEST_CASE("the decomposition is scale-equivariant") {
    SimConfig cfg;
    cfg.duration_s = 200.0;
    auto b = simulate(cfg);
    RunOptions opts;
    opts.max_iters = 60;
    DecompositionResult base = run(b.y, Priors{}, opts);
    DecompositionResult scaled = run(b.y * 10.0, Priors{}, opts);
    CHECK(frobenius_norm(scaled.x - base.x * 10.0) < 1e-3 * 10.0 * frobenius_norm(base.x));
    CHECK(frobenius_norm(scaled.s - base.s * 10.0) <
          1e-3 * std::max(1.0, 10.0 * frobenius_norm(base.s)));
}

TEST_CASE("the cp-constrained variant shares the core contracts") {
    const Tensor3 y = random_lowrank(4, 4, 200, {2, 2, 2}, 61);
    RunOptions opts;
    opts.max_iters = 150;
    DecompositionResult res = run_cp(y, Priors{}, opts, 6);
    // The CP rank is not bounded by the mode sizes, only by the request.
    CHECK(res.multilinear_rank.r1 <= 6);
    const Tensor3 sum = (res.s + res.x) + res.e;
    CHECK((sum.data() - y.data()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(worst_elbo_drop(res.elbo_trace, res.prune_events) <= 1e-8);
    CHECK(frobenius_norm(res.x - y) < 1e-2 * frobenius_norm(y));
}
