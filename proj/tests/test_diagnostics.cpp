#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "vpf/assembly.hpp"
#include "vpf/diagnostics.hpp"

using namespace vpf;

namespace {

MatrixField constant_tensor(const ScalarSpace& S, const SymMat2& B) {
    return interpolate_matrix(S, [&B](Vec2) { return B; });
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("energy of homogeneous states") {
    const TriMesh m = testing::big_square(8);
    const ScalarSpace S(m);
    const SpMat K = assembly::stiffness(S);
    ModelParams p;  // beta = 0.1, eps = 0.02, kappa_t = 0

    const Vec host = Vec::Constant(S.ndof(), 1.0);
    const MatrixField I = constant_tensor(S, SymMat2::identity());
    // psi(1) = 0, |I|^2/4 = 1/2, tr ln I = 0: energy = |Omega| / 2
    CHECK(discrete_energy(S, K, p, host, I) == doctest::Approx(50.0).epsilon(1e-13));

    const Vec mid = Vec::Zero(S.ndof());
    // adds (beta/eps) psi(0) = 5 * 0.25 = 1.25 per unit area
    CHECK(discrete_energy(S, K, p, mid, I) == doctest::Approx(175.0).epsilon(1e-13));

    p.kappa_t = 0.5;
    // elastic coupling: kappa(1) tr I / 2 = 0.5 per unit area on top of the half
    CHECK(discrete_energy(S, K, p, host, I) == doctest::Approx(100.0).epsilon(1e-13));

    p.kappa_t = 0.0;
    SymMat2 D;
    D.a = {2.0, 0.5, 0.0};
    // |B|^2/4 = 17/16, tr ln B = 0
    CHECK(discrete_energy(S, K, p, host, constant_tensor(S, D)) ==
          doctest::Approx(106.25).epsilon(1e-13));
}

TEST_CASE("energy gradient term matches the stiffness form") {
    const TriMesh m = testing::big_square(8);
    const ScalarSpace S(m);
    const SpMat K = assembly::stiffness(S);
    ModelParams p;
    const ScalarField phi = interpolate_scalar(S, [](Vec2 q) { return q.x / 5.0; });
    const MatrixField I = constant_tensor(S, SymMat2::identity());

    double lumped = 0;
    for (int i = 0; i < S.ndof(); ++i)
        lumped += S.w[i] * (p.beta / p.eps * psi(phi.c[i]) + 0.5);
    const double grad_part = 0.5 * p.beta * p.eps * phi.c.dot(K * phi.c);
    CHECK(grad_part == doctest::Approx(0.5 * 0.1 * 0.02 * 4.0).epsilon(1e-12));
    CHECK(discrete_energy(S, K, p, phi.c, I) ==
          doctest::Approx(lumped + grad_part).epsilon(1e-13));
}

TEST_CASE("energy refuses indefinite conformation data") {
    const TriMesh m = testing::big_square(4);
    const ScalarSpace S(m);
    const SpMat K = assembly::stiffness(S);
    ModelParams p;
    MatrixField B = constant_tensor(S, SymMat2::identity());
    B.xx[3] = -1.0;
    CHECK_THROWS_AS((void)discrete_energy(S, K, p, Vec::Zero(S.ndof()), B), SpdError);
}

TEST_CASE("spd margin is the worst vertex eigenvalue") {
    const TriMesh m = testing::big_square(4);
    const ScalarSpace S(m);
    SymMat2 D;
    D.a = {2.0, 0.5, 0.0};
    MatrixField B = constant_tensor(S, D);
    CHECK(spd_margin(B) == doctest::Approx(0.5).epsilon(1e-14));
    B.yy[11] = -0.25;
    CHECK(spd_margin(B) == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("tumour volume") {
    const TriMesh m = testing::big_square(6);
    const ScalarSpace S(m);
    CHECK(tumour_volume(S, Vec::Constant(S.ndof(), 1.0)) == doctest::Approx(100.0));
    CHECK(tumour_volume(S, Vec::Constant(S.ndof(), -1.0)) == doctest::Approx(0.0));
    CHECK(tumour_volume(S, Vec::Zero(S.ndof())) == doctest::Approx(50.0));
}

TEST_CASE("overshoot beyond the physical range") {
    Vec phi = Vec::Constant(10, 0.8);
    CHECK(phi_overshoot(phi) == 0.0);
    phi[3] = 1.03;
    CHECK(phi_overshoot(phi) == doctest::Approx(0.03));
    phi[7] = -1.2;
    CHECK(phi_overshoot(phi) == doctest::Approx(0.2));
}

TEST_CASE("sigma h1 norm") {
    const TriMesh m = testing::big_square(16);
    const ScalarSpace S(m);
    const ScalarField s = interpolate_scalar(S, [](Vec2 q) { return q.x; });
    // ||x||_L2^2 = 2500/3 exactly (P1 interpolation is exact), |x|_H1^2 = 100
    CHECK(sigma_h1(S, s.c) == doctest::Approx(std::sqrt(2500.0 / 3.0 + 100.0)).epsilon(1e-13));
}

}  // TEST_SUITE
