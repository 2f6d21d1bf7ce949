#include <doctest.h>

#include <Eigen/Dense>
#include <optional>

#include "helpers.hpp"
#include "vpf/fespace.hpp"
#include "vpf/lambda_op.hpp"
#include "vpf/propcheck.hpp"

using namespace vpf;

namespace {

Eigen::Matrix2d random_map(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::Matrix2d A;
    do {
        A << 0.5 + 0.5 * std::abs(u(g)), 0.3 * u(g), 0.3 * u(g), 0.5 + 0.5 * std::abs(u(g));
    } while (std::abs(A.determinant()) < 0.05);
    return A;
}

}  // namespace

TEST_SUITE("lambda") {

TEST_CASE("constant vertex data collapses to the identity pattern") {
    auto g = testing::rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const SymMat2 B = testing::random_spd(g);
        const std::array<SymMat2, 3> Bv{B, B, B};
        const Eigen::Matrix2d A = random_map(g);

        const auto el = build_lambda<2>(Bv, A, std::nullopt);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const SymMat2 want = (i == j) ? B : SymMat2::zero();
                CHECK((el.lam(i, j) - want).norm() <= 1e-12 * (1.0 + B.norm()));
            }

        const auto eld = build_lambda<2>(Bv, A, 0.1);
        const SymMat2 bB = beta_delta(B, 0.1);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const SymMat2 want = (i == j) ? bB : SymMat2::zero();
                CHECK((eld.lam(i, j) - want).norm() <= 1e-12 * (1.0 + bB.norm()));
            }
        CHECK(el.degenerate[0]);
        CHECK(el.degenerate[1]);
    }
}

TEST_CASE("chain rule holds on random configurations") {
    auto g = testing::rng(22);
    const std::array<std::optional<double>, 4> deltas{0.5, 0.1, 0.01, std::nullopt};
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::array<SymMat2, 3> Bv{testing::random_spd(g), testing::random_spd(g),
                                        testing::random_spd(g)};
        const Eigen::Matrix2d A = random_map(g);
        for (const auto& d : deltas) {
            const auto el = build_lambda<2>(Bv, A, d);
            worst = std::max(worst, chain_rule_residual<2>(el, Bv, d));
            for (int m = 0; m < 2; ++m) {
                CHECK(el.coef[m] >= 0.0);
                CHECK(el.coef[m] <= 1.0);
            }
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("corrupted element breaks the chain rule") {
    auto g = testing::rng(23);
    const std::array<SymMat2, 3> Bv{testing::random_spd(g), testing::random_spd(g),
                                    testing::random_spd(g)};
    const Eigen::Matrix2d A = random_map(g);
    auto el = build_lambda<2>(Bv, A, std::nullopt);
    REQUIRE(chain_rule_residual<2>(el, Bv, std::nullopt) <= 1e-10);
    el.lhat[0] += SymMat2::identity() * 0.1;
    CHECK(chain_rule_residual<2>(el, Bv, std::nullopt) > 1e-3);
}

TEST_CASE("coincident vertex values take the fallback branch") {
    auto g = testing::rng(24);
    const SymMat2 B = testing::random_spd(g);
    const SymMat2 C = testing::random_spd(g);
    const std::array<SymMat2, 3> Bv{B, B, C};  // edge 0 degenerate, edge 1 not
    const auto el = build_lambda<2>(Bv, random_map(g), std::nullopt);
    CHECK(el.degenerate[0]);
    CHECK(el.coef[0] == 0.0);
    CHECK_FALSE(el.degenerate[1]);
    // the fallback still satisfies the chain rule: the degenerate direction
    // contributes zero difference quotients on both sides
    CHECK(chain_rule_residual<2>(el, Bv, std::nullopt) <= 1e-10);
}

TEST_CASE("unregularized build rejects non-spd vertex data") {
    auto g = testing::rng(25);
    SymMat2 bad;
    bad.a = {1.0, -0.2, 0.0};
    const std::array<SymMat2, 3> Bv{testing::random_spd(g), bad, testing::random_spd(g)};
    const Eigen::Matrix2d A = random_map(g);
    CHECK_THROWS_AS((void)build_lambda<2>(Bv, A, std::nullopt), SpdError);
    // the regularized build handles the same data
    CHECK_NOTHROW((void)build_lambda<2>(Bv, A, 0.1));
}

TEST_CASE("field builder covers the mesh and the naive variant averages") {
    const TriMesh m = testing::big_square(4);
    const ScalarSpace S(m);
    const MatrixField B = interpolate_matrix(S, [](Vec2 p) {
        SymMat2 r;
        r.a = {2.0 + 0.1 * p.x, 2.0 - 0.1 * p.y, 0.05 * p.x * p.y};
        return r;
    });
    const auto field = build_lambda_field(m, B, std::nullopt, false);
    REQUIRE(field.size() == m.tri.size());
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const std::array<SymMat2, 3> Bv{B.at(m.tri[t][0]), B.at(m.tri[t][1]),
                                        B.at(m.tri[t][2])};
        CHECK(chain_rule_residual<2>(field[t], Bv, std::nullopt) <= 1e-10);
    }

    const auto naive = build_lambda_field(m, B, std::nullopt, true);
    REQUIRE(naive.size() == m.tri.size());
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const SymMat2 avg =
            (B.at(m.tri[t][0]) + B.at(m.tri[t][1]) + B.at(m.tri[t][2])) * (1.0 / 3.0);
        CHECK((naive[t].lam(0, 0) - avg).norm() <= 1e-13 * avg.norm());
        CHECK((naive[t].lam(1, 1) - avg).norm() <= 1e-13 * avg.norm());
        CHECK(naive[t].lam(0, 1).norm() <= 1e-13 * avg.norm());
        CHECK(naive[t].lam(1, 0).norm() <= 1e-13 * avg.norm());
    }
}

TEST_CASE("consistency error decreases under refinement") {
    const auto co = lambda_consistency_order();
    CHECK(co.errors[1] < co.errors[0]);
    CHECK(co.errors[2] < co.errors[1]);
    CHECK(co.order >= 0.9);
}

TEST_CASE("property sweeps") {
    const auto cs = chain_rule_sweep(9231, 100);
    CHECK(cs.configs == 100);
    CHECK(cs.max_residual <= 1e-10);
    CHECK(cs.lambda_min >= 0.0);
    CHECK(cs.lambda_max <= 1.0);
    CHECK(gradient_log_sweep(9231, 20) >= -1e-11);
    const auto ns = norm_equiv_sweep(9231, 100);
    CHECK(ns.ratio_min >= 1.0);
    CHECK(ns.ratio_max <= 2.0);
}

}  // TEST_SUITE
