#include "vpf/solver.hpp"

#include <cmath>
#include <sstream>

namespace vpf {

namespace {

SpMat lumped_diag(const Vec& w) {
    const int n = static_cast<int>(w.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n);
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, w[i]);
    SpMat D(n, n);
    D.setFromTriplets(trip.begin(), trip.end());
    return D;
}

double max_abs_diff(const Vec& a, const Vec& b) {
    return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

std::string describe(const LinSolveReport& r) {
    std::ostringstream os;
    os << r.method << ": " << r.iterations << " iterations, relative residual "
       << r.relative_residual;
    return os.str();
}

}  // namespace

Stepper::Stepper(const TriMesh& m, const ModelParams& params, bool naive_lambda)
    : mesh(&m), prm(params), naive(naive_lambda), S(m), V(m, params.element_variant) {
    prm.validate();
    K = assembly::stiffness(S);
    Mb = assembly::boundary_mass(S);

    A_visc = assembly::viscous_block(V, 2.0 * prm.eta_bar);
    B_div = assembly::divergence(V, S);
    vel_fixed.reserve(2 * V.dirichlet_nodes.size());
    for (int node : V.dirichlet_nodes) {
        vel_fixed.push_back(V.dof(0, node));
        vel_fixed.push_back(V.dof(1, node));
    }
    assembly::eliminate_dirichlet(A_visc, vel_fixed, 1.0);
    assembly::zero_columns(B_div, vel_fixed);
    A_visc.makeCompressed();
    B_div.makeCompressed();
    B_divT = B_div.transpose();
    A_fac.compute(A_visc);
    if (A_fac.info() != Eigen::Success) throw SolverError("viscous block factorization failed");
    SpMat Mp = assembly::mass(S);
    Mp_fac.compute(Mp);
    if (Mp_fac.info() != Eigen::Success) throw SolverError("pressure mass factorization failed");

    O = prm.dt * prm.alpha * K + lumped_diag(S.w);
    O.makeCompressed();
}

ScalarField Stepper::solve_nutrient(const Vec& phi_prev, const Vec& sigma_inf,
                                    LinSolveReport* rep) const {
    const int n = S.ndof();
    Vec react(n);
    for (int i = 0; i < n; ++i)
        react[i] = S.w[i] * sources(prm, phi_prev[i], 0.0).sigma;
    SpMat A = K + prm.K_boundary * Mb + lumped_diag(react);
    const Vec rhs = prm.K_boundary * (Mb * sigma_inf);
    Vec x = sigma_inf;
    LinSolveReport r = cg(op(A), rhs, x, jacobi_prec(A), prm.tol_cg, 20000);
    if (!r.converged) {
        x = sigma_inf;
        r = bicgstab(op(A), rhs, x, jacobi_prec(A), prm.tol_cg, 20000);
    }
    if (rep) *rep = r;
    if (!r.converged) throw SolverError("nutrient solve failed (" + describe(r) + ")");
    ScalarField out;
    out.c = std::move(x);
    return out;
}

StepContext Stepper::make_context(const FieldState& prev, const Vec& sigma) const {
    const int n = S.ndof();
    StepContext ctx;
    ctx.phi_prev = prev.phi.c;
    ctx.B_prev = prev.B;
    ctx.sigma = sigma;
    ctx.gamma_phi.resize(n);
    ctx.gamma_v.resize(n);
    ctx.gamma_B.resize(n);
    ctx.kappa.resize(n);
    Vec mob(n);
    for (int i = 0; i < n; ++i) {
        const Sources src = sources(prm, ctx.phi_prev[i], sigma[i]);
        ctx.gamma_phi[i] = src.phi;
        ctx.gamma_v[i] = src.v;
        ctx.gamma_B[i] = src.B;
        ctx.kappa[i] = kappa_value(prm, ctx.phi_prev[i]);
        mob[i] = materials(prm, ctx.phi_prev[i]).m_phi;
    }
    ctx.K_mob = assembly::stiffness_coeff(S, mob);
    ctx.g_div = S.w.cwiseProduct(ctx.gamma_v);
    return ctx;
}

double Stepper::ch_substep(IterState& it, const StepContext& ctx, LinSolveReport* rep) const {
    const int n = S.ndof();
    const double beps = prm.beta * prm.eps;
    const double boe = prm.beta / prm.eps;

    // minus the lagged scheme residuals: b1 for the phase row (times dt),
    // b2 for the potential row
    const Vec conv = assembly::convection_rhs(S, V, it.v, ctx.phi_prev);
    Vec b1 = -(S.w.cwiseProduct(it.phi - ctx.phi_prev) + prm.dt * (ctx.K_mob * it.mu) +
               prm.dt * conv +
               prm.dt * S.w.cwiseProduct(ctx.phi_prev.cwiseProduct(ctx.gamma_v) - ctx.gamma_phi));
    Vec b2(n);
    for (int i = 0; i < n; ++i) {
        const double trB = it.B.at(i).trace();
        b2[i] = S.w[i] * (it.mu[i] - boe * psi_prime_split(it.phi[i], ctx.phi_prev[i]) +
                          prm.chi_phi * ctx.sigma[i] -
                          0.5 * kappa_quotient(prm, it.phi[i], ctx.phi_prev[i]) * trB);
    }
    b2 -= beps * (K * it.phi);

    // block system
    //   diag(w) dphi + dt K_mob dmu = b1
    //   C dphi - diag(w) dmu = b2,   C = beta eps K + diag(w (beta/eps) psi1'')
    Vec dpsi(n);
    for (int i = 0; i < n; ++i) dpsi[i] = S.w[i] * boe * psi_convex_dd(it.phi[i]);
    SpMat C = beps * K + lumped_diag(dpsi);
    const Vec winv = S.w.cwiseInverse();
    SpMat Smat = prm.dt * (ctx.K_mob * (winv.asDiagonal() * C)) + lumped_diag(S.w);
    const Vec rhs = b1 + prm.dt * (ctx.K_mob * winv.cwiseProduct(b2));

    Vec dphi = Vec::Zero(n);
    LinSolveReport r = bicgstab(op(Smat), rhs, dphi, jacobi_prec(Smat), 0.1 * prm.tol_cg, 20000);
    Vec dmu = winv.cwiseProduct(C * dphi - b2);

    auto block_residual = [&](const Vec& dp, const Vec& dm) {
        const Vec r1 = b1 - (S.w.cwiseProduct(dp) + prm.dt * (ctx.K_mob * dm));
        const Vec r2 = b2 - (C * dp - S.w.cwiseProduct(dm));
        const double bn = std::sqrt(b1.squaredNorm() + b2.squaredNorm());
        if (bn == 0.0) return 0.0;
        return std::sqrt(r1.squaredNorm() + r2.squaredNorm()) / bn;
    };
    double rel = block_residual(dphi, dmu);
    if (!(rel <= prm.tol_cg)) {
        dphi.setZero();
        IlutPrecond P(Smat);
        r = bicgstab(op(Smat), rhs, dphi, P, 0.1 * prm.tol_cg, 20000);
        dmu = winv.cwiseProduct(C * dphi - b2);
        rel = block_residual(dphi, dmu);
        if (!(rel <= prm.tol_cg))
            throw SolverError("phase/potential solve failed (" + describe(r) +
                              ", block residual " + std::to_string(rel) + ")");
    }
    if (rep) *rep = r;
    it.phi += dphi;
    it.mu += dmu;
    return rel;
}

Vec Stepper::velocity_solve(const Vec& f, const Vec& g, Vec& p_inout, LinSolveReport* rep) const {
    const Vec Ainvf = A_fac.solve(f);
    const Vec rhs = g - B_div * Ainvf;
    auto Sop = [this](const Vec& q) -> Vec { return B_div * A_fac.solve(B_divT * q); };
    auto Mop = [this](const Vec& r) -> Vec { return 2.0 * prm.eta_bar * Mp_fac.solve(r); };
    if (p_inout.size() != S.ndof()) p_inout = Vec::Zero(S.ndof());
    // targets both relative tol and absolute tol (residual = divergence defect)
    const double tol = prm.tol_saddle / std::max(1.0, rhs.norm());
    LinSolveReport r = cg(Sop, rhs, p_inout, Mop, tol, 2000);
    if (rep) *rep = r;
    if (!r.converged)
        throw SolverError("velocity saddle-point solve stalled (" + describe(r) + ")");
    return Ainvf + A_fac.solve(B_divT * p_inout);
}

double Stepper::stokes_substep(IterState& it, const StepContext& ctx,
                               const std::vector<LambdaElement<2>>& lambda,
                               LinSolveReport* rep) const {
    const int n = S.ndof();
    Vec a(n), btr(n);
    MatrixField Te;
    Te.resize(n);
    for (int i = 0; i < n; ++i) {
        a[i] = it.mu[i] + prm.chi_phi * ctx.sigma[i];
        Te.set(i, elastic_stress(it.B.at(i), ctx.kappa[i]));
        btr[i] = ctx.kappa[i] * it.B.at(i).trace();
    }
    assembly::MomentumRhsData d;
    d.Te = &Te;
    d.a = &a;
    d.phi = &ctx.phi_prev;
    d.b = &btr;
    d.kappa = &ctx.kappa;
    d.lambda = &lambda;
    Vec f = assembly::momentum_rhs(V, d);
    for (int dof : vel_fixed) f[dof] = 0.0;
    it.v.c = velocity_solve(f, ctx.g_div, it.p, rep);
    return linf_norm(B_div * it.v.c - ctx.g_div);
}

void Stepper::oldroyd_substep(IterState& it, const StepContext& ctx,
                              const std::vector<LambdaElement<2>>& lambda,
                              LinSolveReport* rep) const {
    const int n = S.ndof();
    for (int i = 0; i < n; ++i) {
        const double ev = min_eig(it.B.at(i));
        if (!(ev > 0))
            throw SolverError("conformation tensor not SPD at vertex " + std::to_string(i) +
                              " (eigenvalue " + std::to_string(ev) + ")");
    }
    const Vec t = assembly::vdotgrad_rhs(S, V, it.v);
    const auto G4 = assembly::gradv_rhs(S, V, it.v);
    MatrixField Te;
    Te.resize(n);
    for (int i = 0; i < n; ++i) Te.set(i, elastic_stress(it.B.at(i), ctx.kappa[i]));

    MatrixField Bnew;
    Bnew.resize(n);
    auto prec = jacobi_prec(O);
    for (int comp = 0; comp < 3; ++comp) {
        SymMat2 E = SymMat2::zero();
        E.a[comp] = 1.0;
        const double fac = comp == 2 ? 2.0 : 1.0;
        const Vec lam_c = assembly::lambda_conv_rhs(S, V, it.v, lambda, comp);
        Vec rhs(n);
        const Eigen::Matrix2d Ef = E.full();
        for (int i = 0; i < n; ++i) {
            const SymMat2 Bl = it.B.at(i);
            const Eigen::Matrix2d EB = Ef * Bl.full();
            double gv_term = 0;
            for (int aa = 0; aa < 2; ++aa)
                for (int bb = 0; bb < 2; ++bb) gv_term += EB(aa, bb) * G4[2 * aa + bb][i];
            rhs[i] = S.w[i] * ctx.B_prev.at(i).ddot(E) - prm.dt * Bl.ddot(E) * t[i] +
                     prm.dt * lam_c[i] - prm.dt / prm.tau_bar * S.w[i] * Te.at(i).ddot(E) -
                     prm.dt * S.w[i] * ctx.gamma_B[i] * Bl.ddot(E) + 2.0 * prm.dt * gv_term;
        }
        rhs /= fac;
        Vec x = comp == 0 ? it.B.xx : comp == 1 ? it.B.yy : it.B.xy;
        LinSolveReport r = cg(op(O), rhs, x, prec, prm.tol_cg, 20000);
        if (rep) *rep = r;
        if (!r.converged)
            throw SolverError("conformation solve failed, component " + std::to_string(comp) +
                              " (" + describe(r) + ")");
        if (comp == 0) Bnew.xx = std::move(x);
        else if (comp == 1) Bnew.yy = std::move(x);
        else Bnew.xy = std::move(x);
    }
    it.B = std::move(Bnew);
}

std::vector<LambdaElement<2>> Stepper::lambda_field(const MatrixField& B) const {
    return build_lambda_field(*mesh, B, std::nullopt, naive);
}

double Stepper::sigma_inf_boundary_norm(const Vec& sigma_inf) const {
    return std::sqrt(sigma_inf.dot(Mb * sigma_inf));
}

StepDiagnostics Stepper::time_step(FieldState& state, const ScalarField& sigma_inf) const {
    const ScalarField sig = solve_nutrient(state.phi.c, sigma_inf.c);
    const StepContext ctx = make_context(state, sig.c);

    IterState it;
    it.phi = state.phi.c;
    it.mu = state.mu.c.size() == S.ndof() ? state.mu.c : Vec::Zero(S.ndof());
    it.p = state.p.c.size() == S.ndof() ? state.p.c : Vec::Zero(S.ndof());
    it.v = state.v;
    if (it.v.c.size() != V.ndof()) it.v.c = Vec::Zero(V.ndof());
    it.B = state.B;

    int iters = 0;
    double res_div = 0;
    bool converged = false;
    double last_inc = 0;
    for (int l = 1; l <= prm.max_nonlinear_iters; ++l) {
        const Vec phi_old = it.phi, mu_old = it.mu, p_old = it.p, v_old = it.v.c;
        const MatrixField B_old = it.B;

        ch_substep(it, ctx);
        std::vector<LambdaElement<2>> lam;
        try {
            lam = lambda_field(it.B);
        } catch (const SpdError& e) {
            throw SolverError(std::string("conformation tensor not SPD while building the "
                                          "convective operator: ") +
                              e.what());
        }
        res_div = stokes_substep(it, ctx, lam);
        oldroyd_substep(it, ctx, lam);

        iters = l;
        double inc = max_abs_diff(it.phi, phi_old);
        inc = std::max(inc, max_abs_diff(it.mu, mu_old));
        inc = std::max(inc, max_abs_diff(it.p, p_old));
        inc = std::max(inc, max_abs_diff(it.v.c, v_old));
        inc = std::max(inc, max_abs_diff(it.B.xx, B_old.xx));
        inc = std::max(inc, max_abs_diff(it.B.yy, B_old.yy));
        inc = std::max(inc, max_abs_diff(it.B.xy, B_old.xy));
        last_inc = inc;
        if (inc < prm.tol_nonlinear) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw SolverError("nonlinear iteration did not converge in " +
                          std::to_string(prm.max_nonlinear_iters) +
                          " sweeps (last increment " + std::to_string(last_inc) + ")");

    const double margin = spd_margin(it.B);
    if (!(margin > 0))
        throw SolverError("conformation tensor lost positivity (margin " +
                          std::to_string(margin) + ")");

    // scheme-identity residuals at the accepted state
    const Vec conv = assembly::convection_rhs(S, V, it.v, ctx.phi_prev);
    double cons = (S.w.cwiseProduct(it.phi - ctx.phi_prev)).sum() / prm.dt + conv.sum() +
                  (S.w.cwiseProduct(ctx.phi_prev.cwiseProduct(ctx.gamma_v) - ctx.gamma_phi)).sum();
    double mu_mean = 0;
    for (int i = 0; i < S.ndof(); ++i) {
        const double rhs_i = prm.beta / prm.eps * psi_prime_split(it.phi[i], ctx.phi_prev[i]) -
                             prm.chi_phi * ctx.sigma[i] +
                             0.5 * kappa_quotient(prm, it.phi[i], ctx.phi_prev[i]) *
                                 it.B.at(i).trace();
        mu_mean += S.w[i] * (it.mu[i] - rhs_i);
    }

    state.phi.c = std::move(it.phi);
    state.mu.c = std::move(it.mu);
    state.sigma = sig;
    state.p.c = std::move(it.p);
    state.v = std::move(it.v);
    state.B = std::move(it.B);
    state.n += 1;
    state.time += prm.dt;
    state.nonlinear_iters = iters;
    state.res_cons = std::abs(cons);
    state.res_div = res_div;
    state.res_mu = std::abs(mu_mean);

    StepDiagnostics d;
    d.time = state.time;
    d.energy = discrete_energy(S, K, prm, state.phi.c, state.B);
    d.tumour_volume = tumour_volume(S, state.phi.c);
    d.spd_margin = margin;
    d.phi_overshoot = phi_overshoot(state.phi.c);
    d.iters = iters;
    d.res_cons = state.res_cons;
    d.res_div = state.res_div;
    d.res_mu = state.res_mu;
    d.sigma_h1 = sigma_h1(S, state.sigma.c);
    return d;
}

// ---------------------------------------------------------------------- run

namespace {

FieldState transfer_state(const FieldState& old_state, const TriMesh& old_mesh,
                          const ScalarSpace& /*oS*/, const VelocitySpace& oV,
                          const TriMesh& new_mesh, const ScalarSpace& nS,
                          const VelocitySpace& nV) {
    FieldState st;
    st.n = old_state.n;
    st.time = old_state.time;
    const int n = nS.ndof();
    st.phi.c.resize(n);
    st.mu.c.resize(n);
    st.sigma.c.resize(n);
    st.p.c.resize(n);
    st.B.resize(n);
    for (int i = 0; i < n; ++i) {
        const Vec2 x = new_mesh.vertex[i];
        const int t = old_mesh.locate(x);
        const AffineMap map = old_mesh.affine_map(t);
        const Vec2 dlt = x - map.p0;
        const double lx = map.Ainv[0][0] * dlt.x + map.Ainv[0][1] * dlt.y;
        const double ly = map.Ainv[1][0] * dlt.x + map.Ainv[1][1] * dlt.y;
        const double lam[3] = {1.0 - lx - ly, lx, ly};
        const auto& tv = old_mesh.tri[t];
        double phi = 0, mu = 0, sg = 0, pr = 0, bxx = 0, byy = 0, bxy = 0;
        for (int k = 0; k < 3; ++k) {
            phi += lam[k] * old_state.phi.c[tv[k]];
            mu += lam[k] * old_state.mu.c[tv[k]];
            sg += lam[k] * old_state.sigma.c[tv[k]];
            pr += lam[k] * old_state.p.c[tv[k]];
            bxx += lam[k] * old_state.B.xx[tv[k]];
            byy += lam[k] * old_state.B.yy[tv[k]];
            bxy += lam[k] * old_state.B.xy[tv[k]];
        }
        st.phi.c[i] = phi;
        st.mu.c[i] = mu;
        st.sigma.c[i] = sg;
        st.p.c[i] = pr;
        st.B.xx[i] = bxx;
        st.B.yy[i] = byy;
        st.B.xy[i] = bxy;
    }
    st.v = interpolate_velocity(nV, [&](Vec2 x) {
        const int t = old_mesh.locate(x);
        return eval_velocity(oV, old_state.v, t, x);
    });
    return st;
}

StepDiagnostics initial_diagnostics(const ScalarSpace& S, const SpMat& K, const ModelParams& p,
                                    const FieldState& st) {
    StepDiagnostics d;
    d.time = st.time;
    d.energy = discrete_energy(S, K, p, st.phi.c, st.B);
    d.tumour_volume = tumour_volume(S, st.phi.c);
    d.spd_margin = spd_margin(st.B);
    d.phi_overshoot = phi_overshoot(st.phi.c);
    return d;
}

}  // namespace

RunResult run(const ModelParams& params, const InitialData& data, const RunControl& ctrl,
              const StepCallback& cb) {
    params.validate();
    RunResult out;

    TriMesh mesh = build_structured(ctrl.domain, ctrl.n_coarse, ctrl.dirichlet);
    if (ctrl.adapt) {
        for (int round = 0; round < 40; ++round) {
            std::vector<double> vals(mesh.vertex.size());
            for (std::size_t i = 0; i < mesh.vertex.size(); ++i)
                vals[i] = data.phi0(mesh.vertex[i]);
            TriMesh next =
                refine_near_interface(mesh, vals, ctrl.target_h, ctrl.indicator_threshold);
            const bool same = next.vertex.size() == mesh.vertex.size() &&
                              next.tri.size() == mesh.tri.size();
            mesh = std::move(next);
            if (same) break;
        }
    }
    out.mesh = std::make_unique<TriMesh>(std::move(mesh));

    const long long NT = std::llround(params.T_end / params.dt);
    if (std::abs(NT * params.dt - params.T_end) > 1e-9 * std::max(params.dt, params.T_end))
        throw std::invalid_argument("T_end must be an integer multiple of dt");

    auto stepper = std::make_unique<Stepper>(*out.mesh, params, ctrl.naive_lambda);
    const InitialFields init = build_initial_fields(*out.mesh, params, data, ctrl.project_B0);

    FieldState st;
    st.phi = init.phi;
    st.B = init.B;
    const int n0 = stepper->scalar_space().ndof();
    st.mu.c = Vec::Zero(n0);
    st.sigma.c = Vec::Zero(n0);
    st.p.c = Vec::Zero(n0);
    st.v.c = Vec::Zero(stepper->velocity_space().ndof());
    ScalarField sigma_inf = init.sigma_inf;

    out.series.push_back(
        initial_diagnostics(stepper->scalar_space(), stepper->stiffness(), params, st));
    if (cb) cb(0, *out.mesh, st, out.series.back());

    for (long long n = 1; n <= NT; ++n) {
        try {
            StepDiagnostics d = stepper->time_step(st, sigma_inf);
            out.series.push_back(d);
            if (cb) cb(static_cast<int>(n), *out.mesh, st, d);
        } catch (const std::exception& e) {
            out.ok = false;
            out.message = "step " + std::to_string(n) + ": " + e.what();
            out.state = std::move(st);
            return out;
        }

        if (ctrl.adapt && ctrl.remesh_every > 0 && n % ctrl.remesh_every == 0 && n < NT) {
            std::vector<double> vals(st.phi.c.data(), st.phi.c.data() + st.phi.c.size());
            TriMesh next =
                refine_near_interface(*out.mesh, vals, ctrl.target_h, ctrl.indicator_threshold);
            const bool same = next.vertex.size() == out.mesh->vertex.size() &&
                              next.tri.size() == out.mesh->tri.size();
            if (!same) {
                auto new_mesh = std::make_unique<TriMesh>(std::move(next));
                auto new_stepper = std::make_unique<Stepper>(*new_mesh, params, ctrl.naive_lambda);
                FieldState moved = transfer_state(
                    st, *out.mesh, stepper->scalar_space(), stepper->velocity_space(), *new_mesh,
                    new_stepper->scalar_space(), new_stepper->velocity_space());
                if (!(spd_margin(moved.B) > 0)) {
                    out.ok = false;
                    out.message = "step " + std::to_string(n) +
                                  ": transferred conformation tensor not SPD";
                    out.state = std::move(st);
                    return out;
                }
                st = std::move(moved);
                sigma_inf = interpolate_scalar(new_stepper->scalar_space(), data.sigma_inf);
                out.mesh = std::move(new_mesh);
                stepper = std::move(new_stepper);
            }
        }
    }
    out.state = std::move(st);
    return out;
}

}  // namespace vpf
