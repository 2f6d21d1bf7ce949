#pragma once
// Time-stepping engine. Each step solves the nutrient equation once, then
// iterates three decoupled linear substeps (phase/potential increment,
// velocity/pressure saddle point, conformation tensor) until the sup-norm
// increments of all unknowns drop below the nonlinear tolerance. The outer
// loop handles adaptive remeshing with nodal field transfer.

#include <Eigen/SparseCholesky>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vpf/assembly.hpp"
#include "vpf/diagnostics.hpp"
#include "vpf/lambda_op.hpp"
#include "vpf/linsolve.hpp"
#include "vpf/model.hpp"

namespace vpf {

class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& m) : std::runtime_error(m) {}
};

struct FieldState {
    int n = 0;
    double time = 0;
    ScalarField phi, mu, sigma, p;
    VelocityField v;
    MatrixField B;
    int nonlinear_iters = 0;
    double res_cons = 0, res_div = 0, res_mu = 0;
};

// per-step frozen data (previous-step fields and their derived coefficients)
struct StepContext {
    Vec phi_prev;
    MatrixField B_prev;
    Vec sigma;                       // current nutrient
    Vec gamma_phi, gamma_v, gamma_B; // sources at (phi_prev, sigma)
    Vec kappa;                       // kappa(phi_prev), nodal
    SpMat K_mob;                     // <I_h[m_phi(phi_prev)] grad u, grad v>
    Vec g_div;                       // lumped <Gamma_v, q>_h vector
};

struct IterState {
    Vec phi, mu, p;
    VelocityField v;
    MatrixField B;
};

class Stepper {
public:
    Stepper(const TriMesh& mesh, const ModelParams& params, bool naive_lambda = false);

    const ScalarSpace& scalar_space() const { return S; }
    const VelocitySpace& velocity_space() const { return V; }
    const SpMat& stiffness() const { return K; }

    // <grad s, grad xi> + <s Gamma_sigma, xi>_h + K <s, xi>_bdry = K <s_inf, xi>_bdry
    ScalarField solve_nutrient(const Vec& phi_prev, const Vec& sigma_inf,
                               LinSolveReport* rep = nullptr) const;

    StepContext make_context(const FieldState& prev, const Vec& sigma) const;

    // one linearized increment of the phase/potential pair; returns the
    // relative residual of the 2x2 block system at the applied increment
    double ch_substep(IterState& it, const StepContext& ctx, LinSolveReport* rep = nullptr) const;
    // velocity/pressure solve at fresh mu, lagged B; returns |div residual|_inf
    double stokes_substep(IterState& it, const StepContext& ctx,
                          const std::vector<LambdaElement<2>>& lambda,
                          LinSolveReport* rep = nullptr) const;
    // conformation update at fresh v, lagged B (right-hand side data)
    void oldroyd_substep(IterState& it, const StepContext& ctx,
                         const std::vector<LambdaElement<2>>& lambda,
                         LinSolveReport* rep = nullptr) const;

    // advances state in place; throws SolverError on non-convergence or SPD loss
    StepDiagnostics time_step(FieldState& state, const ScalarField& sigma_inf) const;

    std::vector<LambdaElement<2>> lambda_field(const MatrixField& B) const;

    double sigma_inf_boundary_norm(const Vec& sigma_inf) const;  // |.|_{L2(bdry)}

private:
    const TriMesh* mesh;
    ModelParams prm;
    bool naive;

    ScalarSpace S;
    VelocitySpace V;
    SpMat K;        // scalar stiffness
    SpMat Mb;       // boundary mass
    SpMat A_visc;   // viscous block, Dirichlet-eliminated
    SpMat B_div;    // divergence block, Dirichlet columns zeroed
    SpMat B_divT;
    SpMat O;        // lumped mass + dt alpha stiffness
    std::vector<int> vel_fixed;  // constrained velocity dofs
    Eigen::SimplicialLDLT<SpMat> A_fac;
    Eigen::SimplicialLLT<SpMat> Mp_fac;  // pressure mass

    Vec velocity_solve(const Vec& f, const Vec& g, Vec& p_inout, LinSolveReport* rep) const;
};

struct RunControl {
    Box domain{-5, -5, 5, 5};
    int n_coarse = 32;
    std::vector<Segment> dirichlet;
    bool adapt = true;
    double target_h = 0.111;
    double indicator_threshold = 0.7;
    int remesh_every = 10;
    bool naive_lambda = false;
    bool project_B0 = false;
};

struct RunResult {
    std::unique_ptr<TriMesh> mesh;
    FieldState state;
    std::vector<StepDiagnostics> series;
    bool ok = true;
    std::string message;
};

// callback fires at n = 0 with the initial state and after every accepted step
using StepCallback =
    std::function<void(int, const TriMesh&, const FieldState&, const StepDiagnostics&)>;

RunResult run(const ModelParams& params, const InitialData& data, const RunControl& ctrl,
              const StepCallback& cb = {});

}  // namespace vpf
