#pragma once
// Finite element spaces on TriMesh: P1 scalars (also used per matrix
// component), and velocities as Taylor-Hood P2 or P1+bubble (mini).
// The mass-lumped inner product <.,.>_h uses vertex weights sum_K |K|/3.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>

#include "vpf/mesh.hpp"
#include "vpf/symmat.hpp"

namespace vpf {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

struct ScalarField {
    Vec c;  // vertex coefficients
};

// symmetric 2x2 tensor field, P1 per component
struct MatrixField {
    Vec xx, yy, xy;
    SymMat2 at(int i) const {
        SymMat2 m;
        m.a = {xx[i], yy[i], xy[i]};
        return m;
    }
    void set(int i, const SymMat2& m) {
        xx[i] = m.a[0];
        yy[i] = m.a[1];
        xy[i] = m.a[2];
    }
    int size() const { return static_cast<int>(xx.size()); }
    void resize(int n) {
        xx.setZero(n);
        yy.setZero(n);
        xy.setZero(n);
    }
};

struct VelocityField {
    Vec c;  // [x-component dofs | y-component dofs]
};

enum class ElementVariant { taylor_hood, mini };

struct ScalarSpace {
    const TriMesh* mesh = nullptr;
    Vec w;  // lumped vertex weights

    explicit ScalarSpace(const TriMesh& m);
    int ndof() const { return static_cast<int>(mesh->vertex.size()); }
};

struct VelocitySpace {
    const TriMesh* mesh = nullptr;
    ElementVariant variant = ElementVariant::taylor_hood;
    std::vector<std::array<int, 2>> edge;      // Taylor-Hood midpoint nodes
    std::vector<std::array<int, 3>> tri_edge;  // per-triangle edge ids
    int n_scalar = 0;                          // dofs per component
    std::vector<int> dirichlet_nodes;          // constrained nodes (per component)

    VelocitySpace(const TriMesh& m, ElementVariant v);
    int ndof() const { return 2 * n_scalar; }
    int dof(int comp, int node) const { return comp * n_scalar + node; }
    int cell_dofs() const { return variant == ElementVariant::mini ? 4 : 6; }
    int quad_degree() const { return variant == ElementVariant::mini ? 5 : 3; }
    void cell_nodes(int t, int out[6]) const;
    Vec2 node_pos(int node) const;
    // shape values / reference gradients at reference coordinates
    void shapes(double lx, double ly, double N[6]) const;
    void shape_ref_grads(double lx, double ly, double g[6][2]) const;
};

// ------------------------------------------------------------- interpolation
ScalarField interpolate_scalar(const ScalarSpace& S, const std::function<double(Vec2)>& f);
MatrixField interpolate_matrix(const ScalarSpace& S, const std::function<SymMat2(Vec2)>& f);
VelocityField interpolate_velocity(const VelocitySpace& V, const std::function<Vec2(Vec2)>& f);

// lumped products <f,g>_h = sum_P w_P f(P) g(P); matrix fields contract fully
double lumped_inner(const ScalarSpace& S, const Vec& a, const Vec& b);
double lumped_inner(const ScalarSpace& S, const MatrixField& A, const MatrixField& B);

// lumped L2 projection: (Q_h f)(P) = <f, eta_P> / w_P, quadrature of the given
// degree on each element
ScalarField lumped_project(const ScalarSpace& S, const std::function<double(Vec2)>& f,
                           int quad_degree);

// ------------------------------------------------------------------ evaluation
double eval_scalar(const ScalarSpace& S, const ScalarField& f, int t, Vec2 p);
Vec2 eval_velocity(const VelocitySpace& V, const VelocityField& f, int t, Vec2 p);

// --------------------------------------------------------------------- norms
double l2_norm(const ScalarSpace& S, const Vec& f);        // consistent mass
double h1_seminorm(const ScalarSpace& S, const Vec& f);
double lumped_norm(const ScalarSpace& S, const Vec& f);
double linf_norm(const Vec& f);

}  // namespace vpf
