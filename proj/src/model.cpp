#include "vpf/model.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vpf/assembly.hpp"
#include "vpf/quadrature.hpp"

namespace vpf {

void ModelParams::validate() const {
    auto pos = [](double v, const char* name) {
        if (!(v > 0)) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    pos(dt, "dt");
    pos(eps, "eps");
    pos(beta, "beta");
    pos(K_boundary, "K_boundary");
    pos(alpha, "alpha");
    pos(eta_bar, "eta_bar");
    pos(tau_bar, "tau_bar");
    pos(tol_nonlinear, "tol_nonlinear");
    pos(tol_cg, "tol_cg");
    pos(tol_saddle, "tol_saddle");
    if (T_end < 0) throw std::invalid_argument("T_end must be nonnegative");
    if (max_nonlinear_iters < 1) throw std::invalid_argument("max_nonlinear_iters must be >= 1");
}

Sources sources(const ModelParams& p, double phi, double sigma) {
    const double g = p.P * sigma * (1.0 + phi);
    return {g, 0.25 * g, 0.5 * p.G_stress * g, 0.5 * p.C_consumption * (1.0 + phi)};
}

Materials materials(const ModelParams& p, double phi) {
    const double op = 1.0 + phi;
    return {0.5 * op * op + 1e-12, 1.0, p.eta_bar, p.tau_bar, 0.5 * op * p.kappa_t};
}

double kappa_value(const ModelParams& p, double phi) { return 0.5 * (1.0 + phi) * p.kappa_t; }

double kappa_quotient(const ModelParams& p, double a, double b) {
    if (std::abs(a - b) <= 1e-12) return 0.5 * p.kappa_t;
    return (kappa_value(p, a) - kappa_value(p, b)) / (a - b);
}

InitialData default_initial_data(double eps) {
    InitialData d;
    d.phi0 = [eps](Vec2 x) {
        const double theta = std::atan2(x.y, x.x);
        const double r = x.norm() - (1.0 + 0.1 * std::cos(2.0 * theta));
        return -std::tanh(r / (std::sqrt(2.0) * eps));
    };
    d.B0 = [](Vec2) { return SymMat2::identity(); };
    d.sigma_inf = [](Vec2 x) { return std::sin(M_PI * x.norm() / (10.0 * std::sqrt(2.0))); };
    d.b0 = 1.0;
    return d;
}

InitialFields build_initial_fields(const TriMesh& mesh, const ModelParams& p,
                                   const InitialData& data, bool project_B) {
    ScalarSpace S(mesh);
    InitialFields out;
    out.phi = interpolate_scalar(S, data.phi0);
    out.sigma_inf = interpolate_scalar(S, data.sigma_inf);
    out.B = interpolate_matrix(S, data.B0);

    if (project_B) {
        SpMat K = assembly::stiffness(S);
        SpMat lhs(S.ndof(), S.ndof());
        lhs = p.dt * K;
        for (int i = 0; i < S.ndof(); ++i) lhs.coeffRef(i, i) += S.w[i];
        lhs.makeCompressed();
        Eigen::SimplicialLDLT<SpMat> fac(lhs);
        if (fac.info() != Eigen::Success)
            throw std::runtime_error("initial tensor projection: factorization failed");

        const TriQuadRule rule = tri_rule(4);
        MatrixField proj;
        proj.resize(S.ndof());
        for (int comp = 0; comp < 3; ++comp) {
            Vec rhs = Vec::Zero(S.ndof());
            for (std::size_t t = 0; t < mesh.tri.size(); ++t) {
                const AffineMap map = mesh.affine_map(static_cast<int>(t));
                for (std::size_t q = 0; q < rule.pt.size(); ++q) {
                    const double lx = rule.pt[q][0], ly = rule.pt[q][1];
                    const Vec2 x{map.p0.x + map.A[0][0] * lx + map.A[0][1] * ly,
                                 map.p0.y + map.A[1][0] * lx + map.A[1][1] * ly};
                    const double val = data.B0(x).a[comp] * rule.w[q] * map.det;
                    const double lam[3] = {1.0 - lx - ly, lx, ly};
                    for (int k = 0; k < 3; ++k) rhs[mesh.tri[t][k]] += val * lam[k];
                }
            }
            Vec x = fac.solve(rhs);
            if (comp == 0) proj.xx = x;
            else if (comp == 1) proj.yy = x;
            else proj.xy = x;
        }
        out.B = proj;
    }

    out.B_min_eig = std::numeric_limits<double>::infinity();
    int worst = -1;
    for (int i = 0; i < S.ndof(); ++i) {
        const double ev = min_eig(out.B.at(i));
        if (ev < out.B_min_eig) {
            out.B_min_eig = ev;
            worst = i;
        }
    }
    if (!(out.B_min_eig > 0))
        throw std::runtime_error("initial tensor not SPD at vertex " + std::to_string(worst));
    return out;
}

}  // namespace vpf
