#pragma once
// Scalar monitors computed per accepted step: free energy, tumour volume,
// SPD margin of the conformation tensor, phase-bound overshoot, nutrient
// H1-norm, and the scheme-identity residuals logged by the solver.

#include "vpf/fespace.hpp"
#include "vpf/model.hpp"

namespace vpf {

struct StepDiagnostics {
    double time = 0;
    double energy = 0;
    double tumour_volume = 0;
    double spd_margin = 0;
    double phi_overshoot = 0;
    int iters = 0;
    double res_cons = 0, res_div = 0, res_mu = 0;
    double sigma_h1 = 0;
};

// F_h = (beta eps/2)|grad phi|^2 + (beta/eps)<psi(phi),1>_h + 1/4 |B|_h^2
//       + 1/2 <kappa(phi) tr B - tr ln B, 1>_h ; throws SpdError off SPD
double discrete_energy(const ScalarSpace& S, const SpMat& stiffness, const ModelParams& p,
                       const Vec& phi, const MatrixField& B);

double spd_margin(const MatrixField& B);
double tumour_volume(const ScalarSpace& S, const Vec& phi);  // <(1+phi)/2, 1>_h
double phi_overshoot(const Vec& phi);                        // max(|phi| - 1, 0)
double sigma_h1(const ScalarSpace& S, const Vec& sigma);     // consistent mass + stiffness

}  // namespace vpf
