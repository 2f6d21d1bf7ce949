#pragma once
// Model functions (sources, mobilities, elastic coupling), parameter set with
// the published defaults, and constructors for the initial/boundary data.

#include <functional>
#include <string>

#include "vpf/fespace.hpp"

namespace vpf {

struct ModelParams {
    double dt = 0.005;
    double P = 0.2;            // proliferation scale
    double eps = 0.02;         // interface width
    double beta = 0.1;         // surface tension
    double chi_phi = 4.0;      // chemotaxis
    double kappa_t = 0.0;      // elastic coupling strength
    double C_consumption = 2.0;
    double K_boundary = 10.0;
    double eta_bar = 10.0;
    double G_stress = 0.0;     // stress growth coupling
    double tau_bar = 100.0;    // relaxation time
    double alpha = 0.001;      // stress diffusion
    double T_end = 2.0;

    double tol_nonlinear = 1e-7;
    int max_nonlinear_iters = 30;
    double tol_cg = 1e-10;
    double tol_saddle = 1e-9;
    ElementVariant element_variant = ElementVariant::taylor_hood;

    void validate() const;  // throws std::invalid_argument
};

struct Sources {
    double phi, v, B, sigma;
};
Sources sources(const ModelParams& p, double phi, double sigma);

struct Materials {
    double m_phi, m_sigma, eta, tau, kappa;
};
Materials materials(const ModelParams& p, double phi);

inline double psi(double s) {
    const double t = 1.0 - s * s;
    return 0.25 * t * t;
}
inline double psi_prime_split(double a, double b) { return a * a * a - b; }
inline double psi_convex_dd(double a) { return 3.0 * a * a; }

double kappa_value(const ModelParams& p, double phi);
// guarded difference quotient (kappa(a)-kappa(b))/(a-b), slope at the diagonal
double kappa_quotient(const ModelParams& p, double a, double b);

struct InitialData {
    std::function<double(Vec2)> phi0;
    std::function<SymMat2(Vec2)> B0;
    std::function<double(Vec2)> sigma_inf;
    double b0 = 1.0;  // SPD lower bound of B0
};

// tanh profile around a perturbed circle, identity tensor, radial supply
InitialData default_initial_data(double eps);

struct InitialFields {
    ScalarField phi;
    MatrixField B;
    ScalarField sigma_inf;
    double B_min_eig = 0;
};

// nodal interpolation; project_B replaces I_h B0 by the solution of
//   <B_h^0, G>_h + dt <grad B_h^0, grad G> = <B0, G>_{L2}
InitialFields build_initial_fields(const TriMesh& mesh, const ModelParams& p,
                                   const InitialData& data, bool project_B = false);

}  // namespace vpf
