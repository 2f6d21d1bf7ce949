#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "helpers.hpp"
#include "vpf/symmat.hpp"

using namespace vpf;

namespace {

SymMat2 rotated_diag(double l0, double l1, double theta) {
    Eigen::Matrix2d R;
    R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    Eigen::Matrix2d D = Eigen::Vector2d(l0, l1).asDiagonal();
    return SymMat2::from_full(R * D * R.transpose());
}

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("packed symmetric access") {
    SymMat2 m;
    m.a = {1.0, 3.0, 2.0};  // xx, yy, xy
    CHECK(m(0, 0) == 1.0);
    CHECK(m(1, 1) == 3.0);
    CHECK(m(0, 1) == 2.0);
    CHECK(m(1, 0) == 2.0);
    CHECK(m.trace() == 4.0);
    CHECK(m.ddot(m) == doctest::Approx(18.0));  // 1 + 9 + 2*4
    CHECK(m.norm() == doctest::Approx(std::sqrt(18.0)));
    const SymMat2 back = SymMat2::from_full(m.full());
    CHECK(back.a[0] == m.a[0]);
    CHECK(back.a[1] == m.a[1]);
    CHECK(back.a[2] == m.a[2]);
}

TEST_CASE("arithmetic") {
    const SymMat2 i = SymMat2::identity();
    SymMat2 m;
    m.a = {2.0, 0.5, 0.25};
    const SymMat2 s = m + i * 2.0;
    CHECK(s(0, 0) == 4.0);
    CHECK(s(1, 1) == 2.5);
    CHECK(s(0, 1) == 0.25);
    const SymMat2 d = m - m;
    CHECK(d.norm() == 0.0);
}

TEST_CASE("2x2 eigendecomposition") {
    SymMat2 m;
    m.a = {2.0, 0.5, 0.0};
    const auto e = eigh(m);
    CHECK(e.val[0] == doctest::Approx(0.5));
    CHECK(e.val[1] == doctest::Approx(2.0));

    const SymMat2 r = rotated_diag(0.3, 7.0, 0.81);
    const auto er = eigh(r);
    CHECK(er.val[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(er.val[1] == doctest::Approx(7.0).epsilon(1e-12));
    // reconstruction
    Eigen::Matrix2d rec = Eigen::Matrix2d::Zero();
    for (int k = 0; k < 2; ++k)
        rec += er.val[k] * er.vec.col(k) * er.vec.col(k).transpose();
    CHECK((rec - r.full()).norm() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(min_eig(r) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("3x3 jacobi eigendecomposition") {
    Eigen::Matrix3d R;
    const double c = std::cos(0.6), s = std::sin(0.6);
    R << c, -s, 0, s, c, 0, 0, 0, 1;
    Eigen::Matrix3d R2;
    const double c2 = std::cos(0.3), s2 = std::sin(0.3);
    R2 << 1, 0, 0, 0, c2, -s2, 0, s2, c2;
    const Eigen::Matrix3d D = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
    const Eigen::Matrix3d Q = R * R2;
    const SymMat3 m = SymMat3::from_full(Q * D * Q.transpose());
    const auto e = eigh(m);
    CHECK(e.val[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.val[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.val[2] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK((e.vec * e.vec.transpose() - Eigen::Matrix3d::Identity()).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("scalar regularized functions") {
    CHECK(g_delta(0.25, 0.5) == doctest::Approx(0.5 + std::log(0.5) - 1.0));
    CHECK(g_delta(2.0, 0.5) == doctest::Approx(std::log(2.0)));
    CHECK(beta_delta(0.5, 0.1) == 0.5);
    CHECK(beta_delta(-3.0, 0.1) == 0.1);
    CHECK(f_delta(0.05, 0.1) == doctest::Approx(0.0));
    CHECK(f_delta(2.0, 0.1) == doctest::Approx(2.0));
    CHECK(g_delta_prime(0.05, 0.1) == doctest::Approx(10.0));
    CHECK_THROWS_AS((void)g_delta(1.0, 0.0), std::invalid_argument);
    // C^1 continuity at the knot
    const double d = 0.3;
    CHECK(g_delta(d - 1e-13, d) == doctest::Approx(g_delta(d + 1e-13, d)).epsilon(1e-10));
    CHECK(f_delta(d - 1e-13, d) == doctest::Approx(f_delta(d + 1e-13, d)).epsilon(1e-10));
}

TEST_CASE("matrix regularized functions act on eigenvalues") {
    const SymMat2 r = rotated_diag(5.0, 0.01, 1.1);
    const SymMat2 b = beta_delta(r, 0.1);
    const auto eb = eigh(b);
    CHECK(eb.val[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(eb.val[1] == doctest::Approx(5.0).epsilon(1e-12));

    SymMat2 m;
    m.a = {0.05, 2.0, 0.0};
    const SymMat2 inv = beta_delta_inv(m, 0.1);
    CHECK(inv(0, 0) == doctest::Approx(10.0));
    CHECK(inv(1, 1) == doctest::Approx(0.5));
    CHECK(inv(0, 1) == doctest::Approx(0.0));

    // above delta the traces reduce to plain log sums
    SymMat2 p;
    p.a = {2.0, 0.5, 0.0};
    CHECK(tr_g_delta(p, 0.1) == doctest::Approx(std::log(2.0) + std::log(0.5)).epsilon(1e-13));
    CHECK(tr_f_delta(p, 0.1) == doctest::Approx(0.5 * 4.0 + 0.5 * 0.25).epsilon(1e-13));
    CHECK(tr_ln_beta_delta(p, 0.1) == doctest::Approx(0.0).epsilon(1e-13));
    // below delta they switch to the linear branch
    SymMat2 q;
    q.a = {0.05, 2.0, 0.0};
    CHECK(tr_g_delta(q, 0.1) ==
          doctest::Approx(0.05 / 0.1 + std::log(0.1) - 1.0 + std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("spd inverse and log trace") {
    SymMat2 m;
    m.a = {2.0, 0.5, 0.0};
    const SymMat2 inv = inverse_spd(m);
    CHECK(inv(0, 0) == doctest::Approx(0.5));
    CHECK(inv(1, 1) == doctest::Approx(2.0));
    CHECK(tr_ln_spd(m) == doctest::Approx(0.0).epsilon(1e-14));

    const SymMat2 r = rotated_diag(3.0, 0.2, 0.4);
    const SymMat2 rinv = inverse_spd(r);
    CHECK((rinv.full() * r.full() - Eigen::Matrix2d::Identity()).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(tr_ln_spd(r) == doctest::Approx(std::log(3.0) + std::log(0.2)).epsilon(1e-12));
}

TEST_CASE("non-spd inputs are rejected") {
    SymMat2 m;
    m.a = {1.0, -0.5, 0.0};
    CHECK_THROWS_AS((void)inverse_spd(m), SpdError);
    CHECK_THROWS_AS((void)tr_ln_spd(m), SpdError);
    try {
        (void)inverse_spd(m);
    } catch (const SpdError& e) {
        CHECK(e.eigenvalue == doctest::Approx(-0.5));
        CHECK(std::string(e.what()).find("not SPD") != std::string::npos);
    }
    SymMat2 z;  // zero matrix sits below the floor too
    CHECK_THROWS_AS((void)tr_ln_spd(z), SpdError);
}

TEST_CASE("elastic stress") {
    SymMat2 b;
    b.a = {2.0, 1.0, 0.0};
    const SymMat2 t0 = elastic_stress(b, 0.0);
    CHECK(t0(0, 0) == doctest::Approx(3.0));  // 4 - 1
    CHECK(t0(1, 1) == doctest::Approx(0.0));  // 1 - 1
    CHECK(t0(0, 1) == doctest::Approx(0.0));

    const SymMat2 r = rotated_diag(1.7, 0.6, 0.9);
    const SymMat2 t = elastic_stress(r, 0.25);
    const Eigen::Matrix2d B = r.full();
    const Eigen::Matrix2d ref = B * B + 0.25 * B - Eigen::Matrix2d::Identity();
    CHECK((t.full() - ref).norm() == doctest::Approx(0.0).epsilon(1e-13));
    // stress of identity with kappa: I + kappa I - I = kappa I
    const SymMat2 ti = elastic_stress(SymMat2::identity(), 0.5);
    CHECK(ti(0, 0) == doctest::Approx(0.5));
    CHECK(ti(1, 1) == doctest::Approx(0.5));
    CHECK(ti(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("negative part norm") {
    SymMat2 m;
    m.a = {1.0, -0.5, 0.0};
    CHECK(neg_part_norm(m) == doctest::Approx(0.5));
    CHECK(neg_part_norm(SymMat2::identity()) == doctest::Approx(0.0));
}

TEST_CASE("regularization inequalities on random matrices") {
    auto g = testing::rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> ud(0.05, 0.9);
    for (int trial = 0; trial < 200; ++trial) {
        SymMat2 B, C;
        B.a = {4.0 * u(g), 4.0 * u(g), 4.0 * u(g)};
        C.a = {4.0 * u(g), 4.0 * u(g), 4.0 * u(g)};
        const double delta = ud(g);
        const double kap = 2.0 * u(g);
        // (B - C) : beta^{-1}(C) >= tr(g(B) - g(C))
        const double lhs_b = (B - C).ddot(beta_delta_inv(C, delta));
        const double rhs_b = tr_g_delta(B, delta) - tr_g_delta(C, delta);
        CHECK(lhs_b >= rhs_b - 1e-10);
        // (B beta(B) + kap beta(B) - I) : (B + kap I - beta^{-1}(B)) >= 0
        const Eigen::Matrix2d bb = B.full() * beta_delta(B, delta).full();
        const Eigen::Matrix2d lhs_d =
            bb + kap * beta_delta(B, delta).full() - Eigen::Matrix2d::Identity();
        const Eigen::Matrix2d rhs_d = B.full() + kap * Eigen::Matrix2d::Identity() -
                                      beta_delta_inv(B, delta).full();
        CHECK((lhs_d.array() * rhs_d.array()).sum() >= -1e-10);
        // B : (B - beta^{-1}(B)) >= |B|^2 - d
        CHECK(B.ddot(B - beta_delta_inv(B, delta)) >= B.ddot(B) - 2.0 - 1e-10);
    }
}

}  // TEST_SUITE
