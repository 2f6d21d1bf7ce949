#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "vpf/solver.hpp"

using namespace vpf;

namespace {

const std::vector<Segment> kLeftEdge{{-5, -5, -5, 5}};

TriMesh pinned_square(int n) { return build_structured(Box{-5, -5, 5, 5}, n, kLeftEdge); }

FieldState make_state(const ScalarSpace& S, const VelocitySpace& V,
                      const std::function<double(Vec2)>& phi0, const SymMat2& B0) {
    FieldState st;
    st.phi = interpolate_scalar(S, phi0);
    st.mu.c = Vec::Zero(S.ndof());
    st.sigma.c = Vec::Zero(S.ndof());
    st.p.c = Vec::Zero(S.ndof());
    st.v.c = Vec::Zero(V.ndof());
    st.B = interpolate_matrix(S, [&B0](Vec2) { return B0; });
    return st;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("nutrient equation reproduces constants without consumption") {
    const TriMesh m = pinned_square(8);
    ModelParams p;
    const Stepper st(m, p);
    const Vec phi = Vec::Constant(st.scalar_space().ndof(), -1.0);  // host: no uptake
    const Vec sinf = Vec::Constant(st.scalar_space().ndof(), 0.6);
    LinSolveReport rep;
    const ScalarField sig = st.solve_nutrient(phi, sinf, &rep);
    CHECK(rep.converged);
    CHECK((sig.c.array() - 0.6).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("nutrient solution obeys the maximum principle") {
    const TriMesh m = pinned_square(16);
    ModelParams p;
    const Stepper st(m, p);
    const ScalarSpace& S = st.scalar_space();
    const Vec phi = Vec::Constant(S.ndof(), 1.0);  // full uptake everywhere
    const Vec sinf = Vec::Constant(S.ndof(), 1.0);
    const ScalarField sig = st.solve_nutrient(phi, sinf);
    CHECK(sig.c.minCoeff() >= -1e-9);
    CHECK(sig.c.maxCoeff() <= 1.0 + 1e-9);
    // consumption actually depletes the interior
    const int center = static_cast<int>(m.locate(Vec2{0.1, 0.1}));
    CHECK(eval_p1(m, std::vector<double>(sig.c.data(), sig.c.data() + sig.c.size()),
                  Vec2{0.0, 0.0}) < 0.9);
    (void)center;
}

TEST_CASE("pure host tissue is a fixed point of the time step") {
    const TriMesh m = pinned_square(8);
    ModelParams p;
    const Stepper st(m, p);
    const ScalarSpace& S = st.scalar_space();
    FieldState state = make_state(S, st.velocity_space(), [](Vec2) { return -1.0; },
                                  SymMat2::identity());
    const ScalarField sinf = interpolate_scalar(S, [](Vec2) { return 0.8; });

    const StepDiagnostics d = st.time_step(state, sinf);
    CHECK(state.nonlinear_iters <= 3);
    CHECK((state.phi.c.array() + 1.0).abs().maxCoeff() <= 1e-8);
    CHECK((state.sigma.c.array() - 0.8).abs().maxCoeff() <= 1e-8);
    // mu = beta/eps psi'(-1) - chi sigma + 0 = -chi sigma
    CHECK((state.mu.c.array() + p.chi_phi * 0.8).abs().maxCoeff() <= 1e-6);
    CHECK(state.v.c.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(state.p.c.cwiseAbs().maxCoeff() <= 1e-5);
    CHECK((state.B.xx.array() - 1.0).abs().maxCoeff() <= 1e-9);
    CHECK((state.B.yy.array() - 1.0).abs().maxCoeff() <= 1e-9);
    CHECK(state.B.xy.cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(d.spd_margin > 0.99);
    CHECK(d.tumour_volume <= 1e-8);
    CHECK(state.res_cons <= 1e-8);
    CHECK(state.res_div <= p.tol_saddle);
    CHECK(state.res_mu <= 1e-8);
}

TEST_CASE("velocity carries exactly the prescribed total divergence") {
    const TriMesh m = pinned_square(8);
    ModelParams p;
    const Stepper st(m, p);
    const ScalarSpace& S = st.scalar_space();
    const VelocitySpace& V = st.velocity_space();

    FieldState prev = make_state(S, V, [](Vec2) { return 0.0; }, SymMat2::identity());
    const Vec sigma = Vec::Ones(S.ndof());
    const StepContext ctx = st.make_context(prev, sigma);
    // Gamma_v = P sigma (1 + phi) / 4 = 0.05 on the whole box
    CHECK((ctx.gamma_v.array() - 0.05).abs().maxCoeff() <= 1e-14);

    IterState it;
    it.phi = prev.phi.c;
    it.mu = Vec::Zero(S.ndof());
    it.p = Vec::Zero(S.ndof());
    it.v.c = Vec::Zero(V.ndof());
    it.B = prev.B;
    const auto lam = st.lambda_field(it.B);
    const double rdiv = st.stokes_substep(it, ctx, lam);
    CHECK(rdiv <= p.tol_saddle);

    const SpMat D = assembly::divergence(V, S);
    const double total = (D * it.v.c).sum();
    CHECK(total == doctest::Approx(0.05 * 100.0).epsilon(1e-6));
    // something nontrivial actually flows
    CHECK(it.v.c.cwiseAbs().maxCoeff() > 1e-4);
}

TEST_CASE("spatially constant conformation follows the relaxation ode") {
    const TriMesh m = pinned_square(4);
    ModelParams p;
    p.kappa_t = 0.5;
    const Stepper st(m, p);
    const ScalarSpace& S = st.scalar_space();

    SymMat2 B0;
    B0.a = {1.5, 0.8, 0.2};
    FieldState prev = make_state(S, st.velocity_space(), [](Vec2) { return 0.0; }, B0);
    const StepContext ctx = st.make_context(prev, Vec::Ones(S.ndof()));
    CHECK((ctx.kappa.array() - 0.25).abs().maxCoeff() <= 1e-14);  // kappa(0) = kappa_t/2

    IterState it;
    it.phi = prev.phi.c;
    it.mu = Vec::Zero(S.ndof());
    it.p = Vec::Zero(S.ndof());
    it.v.c = Vec::Zero(st.velocity_space().ndof());
    it.B = prev.B;
    st.oldroyd_substep(it, ctx, st.lambda_field(prev.B));

    // no flow, no source: B = B_prev - dt/tau (B_prev^2 + kappa B_prev - I) nodewise
    const SymMat2 Bexp = B0 - elastic_stress(B0, 0.25) * (p.dt / p.tau_bar);
    for (int i = 0; i < S.ndof(); ++i) {
        CHECK(it.B.xx[i] == doctest::Approx(Bexp(0, 0)).epsilon(1e-10));
        CHECK(it.B.yy[i] == doctest::Approx(Bexp(1, 1)).epsilon(1e-10));
        CHECK(it.B.xy[i] == doctest::Approx(Bexp(0, 1)).epsilon(1e-10));
    }
}

TEST_CASE("conservation residual measures what it claims") {
    const TriMesh m = pinned_square(16);
    ModelParams p;
    p.eps = 0.5;
    const Stepper st(m, p);
    const ScalarSpace& S = st.scalar_space();
    FieldState state = make_state(
        S, st.velocity_space(),
        [](Vec2 q) { return 0.5 * std::cos(M_PI * q.x / 5.0) * std::cos(M_PI * q.y / 5.0); },
        SymMat2::identity());
    const Vec phi_prev = state.phi.c;
    const ScalarField sinf = interpolate_scalar(S, [](Vec2) { return 1.0; });
    st.time_step(state, sinf);

    // recompute the lumped mass balance from the accepted fields
    const auto residual = [&](const Vec& phi_new) {
        const Vec conv = assembly::convection_rhs(S, st.velocity_space(), state.v, phi_prev);
        double cons = (S.w.cwiseProduct(phi_new - phi_prev)).sum() / p.dt + conv.sum();
        for (int i = 0; i < S.ndof(); ++i) {
            const Sources src = sources(p, phi_prev[i], state.sigma.c[i]);
            cons += S.w[i] * (phi_prev[i] * src.v - src.phi);
        }
        return cons;
    };
    const double r0 = residual(state.phi.c);
    CHECK(std::abs(r0) == doctest::Approx(state.res_cons).epsilon(1e-10));
    CHECK(std::abs(r0) <= 1e-6);

    // a planted leak at one vertex shows up at exactly w_k * delta / dt
    const int k = static_cast<int>(m.locate(Vec2{0.2, 0.3}));
    const int vk = m.tri[k][0];
    Vec corrupted = state.phi.c;
    corrupted[vk] += 1e-3;
    const double jump = residual(corrupted) - r0;
    CHECK(jump == doctest::Approx(S.w[vk] * 1e-3 / p.dt).epsilon(1e-9));
}

TEST_CASE("tighter nonlinear tolerance never converges in fewer sweeps") {
    const TriMesh m = pinned_square(8);
    const auto phi0 = [](Vec2 q) {
        return 0.4 * std::sin(M_PI * q.x / 5.0) * std::sin(M_PI * q.y / 5.0);
    };
    int iters_loose = 0, iters_tight = 0;
    for (const double tol : {1e-5, 1e-9}) {
        ModelParams p;
        p.eps = 0.5;
        p.tol_nonlinear = tol;
        const Stepper st(m, p);
        FieldState state =
            make_state(st.scalar_space(), st.velocity_space(), phi0, SymMat2::identity());
        const ScalarField sinf =
            interpolate_scalar(st.scalar_space(), [](Vec2) { return 1.0; });
        st.time_step(state, sinf);
        (tol == 1e-5 ? iters_loose : iters_tight) = state.nonlinear_iters;
    }
    CHECK(iters_tight >= iters_loose);
    CHECK(iters_tight <= iters_loose + 4);
}

TEST_CASE("mini element variant runs the same step") {
    const TriMesh m = pinned_square(8);
    ModelParams p;
    p.eps = 0.5;
    p.element_variant = ElementVariant::mini;
    const Stepper st(m, p);
    FieldState state = make_state(
        st.scalar_space(), st.velocity_space(),
        [](Vec2 q) { return 0.5 * std::cos(M_PI * q.x / 5.0) * std::cos(M_PI * q.y / 5.0); },
        SymMat2::identity());
    const ScalarField sinf = interpolate_scalar(st.scalar_space(), [](Vec2) { return 1.0; });
    for (int n = 0; n < 3; ++n) {
        const StepDiagnostics d = st.time_step(state, sinf);
        CHECK(d.spd_margin > 0.0);
        CHECK(state.res_div <= p.tol_saddle);
        CHECK(state.nonlinear_iters <= 15);
    }
}

TEST_CASE("a non-spd conformation state is rejected, not integrated") {
    const TriMesh m = pinned_square(4);
    ModelParams p;
    const Stepper st(m, p);
    FieldState state = make_state(st.scalar_space(), st.velocity_space(),
                                  [](Vec2) { return -1.0; }, SymMat2::identity());
    state.B.yy[7] = -0.3;
    const ScalarField sinf = interpolate_scalar(st.scalar_space(), [](Vec2) { return 1.0; });
    CHECK_THROWS_AS(st.time_step(state, sinf), SolverError);
}

TEST_CASE("remeshing keeps the tumour volume continuous") {
    ModelParams p;
    p.eps = 0.1;
    p.T_end = 12 * p.dt;
    InitialData data = default_initial_data(p.eps);
    RunControl ctrl;
    ctrl.n_coarse = 16;
    ctrl.dirichlet = kLeftEdge;
    ctrl.adapt = true;
    ctrl.target_h = 0.2;
    ctrl.remesh_every = 4;
    const RunResult res = run(p, data, ctrl);
    REQUIRE(res.ok);
    REQUIRE(res.series.size() == 13);
    for (std::size_t i = 1; i < res.series.size(); ++i) {
        const double a = res.series[i - 1].tumour_volume;
        const double b = res.series[i].tumour_volume;
        CHECK(std::abs(b - a) <= 0.01 * std::max(1.0, a));
        CHECK(res.series[i].spd_margin > 0.0);
        CHECK(res.series[i].iters <= 15);
    }
    CHECK(res.state.n == 12);
    CHECK(res.mesh->h_min() < res.mesh->h_max());  // adaptation actually happened
}

}  // TEST_SUITE
