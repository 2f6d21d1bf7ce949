#pragma once
// Assemblers for the bilinear forms and right-hand sides of the scheme.
// All loops are element-serial and deterministic.

#include <array>
#include <optional>
#include <vector>

#include "vpf/fespace.hpp"
#include "vpf/lambda_op.hpp"

namespace vpf::assembly {

// scalar P1 forms
SpMat mass(const ScalarSpace& S);                               // <u, v>
SpMat stiffness(const ScalarSpace& S);                          // <grad u, grad v>
SpMat stiffness_coeff(const ScalarSpace& S, const Vec& m);      // <I_h[m] grad u, grad v>
SpMat boundary_mass(const ScalarSpace& S);                      // <u, v>_{L2(boundary)}

// velocity/pressure blocks (no boundary conditions applied)
SpMat viscous_block(const VelocitySpace& V, double two_eta);    // 2eta <D(u), D(w)>
SpMat divergence(const VelocitySpace& V, const ScalarSpace& P); // <div u, q>, rows = pressure

// symmetric row/column elimination: zero coupled entries, put `diag` on the
// diagonal of each constrained dof
void eliminate_dirichlet(SpMat& A, const std::vector<int>& dofs, double diag);
// zero the given columns (velocity dofs) of a pressure-by-velocity block
void zero_columns(SpMat& B, const std::vector<int>& dofs);

// c_i = <v . grad phi, eta_i>
Vec convection_rhs(const ScalarSpace& S, const VelocitySpace& V, const VelocityField& v,
                   const Vec& phi);

// momentum right-hand side:
//   f(w) = -<I_h[Te], grad w> + <a grad phi, w> + 1/2 <grad I_h[b], w>
//          - 1/2 sum_{i,j} <d_j I_h[kappa] tr Lambda_{i,j}, w_i>
// with Te, a, b, kappa given by vertex values and Lambda per element
// (lambda == nullptr skips both kappa terms).
struct MomentumRhsData {
    const MatrixField* Te = nullptr;
    const Vec* a = nullptr;
    const Vec* phi = nullptr;
    const Vec* b = nullptr;         // kappa(phi) tr B, nodal
    const Vec* kappa = nullptr;     // kappa(phi), nodal
    const std::vector<LambdaElement<2>>* lambda = nullptr;
};
Vec momentum_rhs(const VelocitySpace& V, const MomentumRhsData& d);

// t_i = <v, grad eta_i>
Vec vdotgrad_rhs(const ScalarSpace& S, const VelocitySpace& V, const VelocityField& v);
// G[ab][i] = <(grad v)_{ab}, eta_i> with ab in row-major order xx, xy, yx, yy
std::array<Vec, 4> gradv_rhs(const ScalarSpace& S, const VelocitySpace& V,
                             const VelocityField& v);
// r_i = sum_{k,j} <v_k (Lambda_{k,j} : E_c), d_j eta_i> for test component c
Vec lambda_conv_rhs(const ScalarSpace& S, const VelocitySpace& V, const VelocityField& v,
                    const std::vector<LambdaElement<2>>& lambda, int comp);

}  // namespace vpf::assembly
