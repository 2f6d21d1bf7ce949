#include "vpf/fespace.hpp"

#include <map>

#include "vpf/quadrature.hpp"

namespace vpf {

ScalarSpace::ScalarSpace(const TriMesh& m) : mesh(&m) {
    w.setZero(static_cast<int>(m.vertex.size()));
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const double third = m.affine_map(static_cast<int>(t)).det / 6.0;  // |K|/3
        for (int k = 0; k < 3; ++k) w[m.tri[t][k]] += third;
    }
}

VelocitySpace::VelocitySpace(const TriMesh& m, ElementVariant v) : mesh(&m), variant(v) {
    const int nv = static_cast<int>(m.vertex.size());
    const int nt = static_cast<int>(m.tri.size());
    std::map<std::pair<int, int>, int> edge_id;
    if (variant == ElementVariant::taylor_hood) {
        tri_edge.resize(nt);
        for (int t = 0; t < nt; ++t) {
            const auto& tv = m.tri[t];
            for (int k = 0; k < 3; ++k) {
                int a = tv[k], b = tv[(k + 1) % 3];
                auto key = std::minmax(a, b);
                auto [it, inserted] = edge_id.try_emplace(key, static_cast<int>(edge.size()));
                if (inserted) edge.push_back({key.first, key.second});
                tri_edge[t][k] = it->second;
            }
        }
        n_scalar = nv + static_cast<int>(edge.size());
    } else {
        n_scalar = nv + nt;  // one bubble per element
    }

    std::vector<char> fixed(n_scalar, 0);
    for (const Facet& f : mesh->bfacet) {
        if (f.tag != BTag::dirichlet) continue;
        fixed[f.v0] = fixed[f.v1] = 1;
        if (variant == ElementVariant::taylor_hood) {
            auto it = edge_id.find(std::minmax(f.v0, f.v1));
            if (it == edge_id.end()) throw MeshError("boundary facet is not a mesh edge");
            fixed[nv + it->second] = 1;
        }
    }
    for (int n = 0; n < n_scalar; ++n)
        if (fixed[n]) dirichlet_nodes.push_back(n);
}

void VelocitySpace::cell_nodes(int t, int out[6]) const {
    const auto& tv = mesh->tri[t];
    out[0] = tv[0];
    out[1] = tv[1];
    out[2] = tv[2];
    const int nv = static_cast<int>(mesh->vertex.size());
    if (variant == ElementVariant::taylor_hood) {
        for (int k = 0; k < 3; ++k) out[3 + k] = nv + tri_edge[t][k];
    } else {
        out[3] = nv + t;
        out[4] = out[5] = -1;
    }
}

Vec2 VelocitySpace::node_pos(int node) const {
    const int nv = static_cast<int>(mesh->vertex.size());
    if (node < nv) return mesh->vertex[node];
    if (variant == ElementVariant::taylor_hood) {
        const auto& e = edge[node - nv];
        return (mesh->vertex[e[0]] + mesh->vertex[e[1]]) * 0.5;
    }
    const auto& tv = mesh->tri[node - nv];
    return (mesh->vertex[tv[0]] + mesh->vertex[tv[1]] + mesh->vertex[tv[2]]) * (1.0 / 3.0);
}

void VelocitySpace::shapes(double lx, double ly, double N[6]) const {
    const double l0 = 1.0 - lx - ly, l1 = lx, l2 = ly;
    if (variant == ElementVariant::taylor_hood) {
        N[0] = l0 * (2 * l0 - 1);
        N[1] = l1 * (2 * l1 - 1);
        N[2] = l2 * (2 * l2 - 1);
        N[3] = 4 * l0 * l1;
        N[4] = 4 * l1 * l2;
        N[5] = 4 * l2 * l0;
    } else {
        N[0] = l0;
        N[1] = l1;
        N[2] = l2;
        N[3] = 27 * l0 * l1 * l2;
        N[4] = N[5] = 0;
    }
}

void VelocitySpace::shape_ref_grads(double lx, double ly, double g[6][2]) const {
    const double l0 = 1.0 - lx - ly, l1 = lx, l2 = ly;
    static const double dl[3][2] = {{-1, -1}, {1, 0}, {0, 1}};
    if (variant == ElementVariant::taylor_hood) {
        for (int c = 0; c < 2; ++c) {
            g[0][c] = (4 * l0 - 1) * dl[0][c];
            g[1][c] = (4 * l1 - 1) * dl[1][c];
            g[2][c] = (4 * l2 - 1) * dl[2][c];
            g[3][c] = 4 * (l1 * dl[0][c] + l0 * dl[1][c]);
            g[4][c] = 4 * (l2 * dl[1][c] + l1 * dl[2][c]);
            g[5][c] = 4 * (l0 * dl[2][c] + l2 * dl[0][c]);
        }
    } else {
        for (int c = 0; c < 2; ++c) {
            g[0][c] = dl[0][c];
            g[1][c] = dl[1][c];
            g[2][c] = dl[2][c];
            g[3][c] = 27 * (l1 * l2 * dl[0][c] + l0 * l2 * dl[1][c] + l0 * l1 * dl[2][c]);
            g[4][c] = g[5][c] = 0;
        }
    }
}

// ------------------------------------------------------------- interpolation
ScalarField interpolate_scalar(const ScalarSpace& S, const std::function<double(Vec2)>& f) {
    ScalarField out;
    out.c.resize(S.ndof());
    for (int i = 0; i < S.ndof(); ++i) out.c[i] = f(S.mesh->vertex[i]);
    return out;
}

MatrixField interpolate_matrix(const ScalarSpace& S, const std::function<SymMat2(Vec2)>& f) {
    MatrixField out;
    out.resize(S.ndof());
    for (int i = 0; i < S.ndof(); ++i) out.set(i, f(S.mesh->vertex[i]));
    return out;
}

VelocityField interpolate_velocity(const VelocitySpace& V, const std::function<Vec2(Vec2)>& f) {
    VelocityField out;
    out.c.setZero(V.ndof());
    const int nv = static_cast<int>(V.mesh->vertex.size());
    const int n_point = V.variant == ElementVariant::taylor_hood ? V.n_scalar : nv;
    for (int n = 0; n < n_point; ++n) {
        Vec2 val = f(V.node_pos(n));
        out.c[V.dof(0, n)] = val.x;
        out.c[V.dof(1, n)] = val.y;
    }
    if (V.variant == ElementVariant::mini) {
        // bubble equals 1 at the centroid: coefficient is the defect against
        // the vertex interpolant there
        for (std::size_t t = 0; t < V.mesh->tri.size(); ++t) {
            const auto& tv = V.mesh->tri[t];
            Vec2 val = f(V.node_pos(nv + static_cast<int>(t)));
            double mx = 0, my = 0;
            for (int k = 0; k < 3; ++k) {
                mx += out.c[V.dof(0, tv[k])];
                my += out.c[V.dof(1, tv[k])];
            }
            out.c[V.dof(0, nv + static_cast<int>(t))] = val.x - mx / 3.0;
            out.c[V.dof(1, nv + static_cast<int>(t))] = val.y - my / 3.0;
        }
    }
    return out;
}

// --------------------------------------------------------------- lumped products
double lumped_inner(const ScalarSpace& S, const Vec& a, const Vec& b) {
    return (S.w.array() * a.array() * b.array()).sum();
}

double lumped_inner(const ScalarSpace& S, const MatrixField& A, const MatrixField& B) {
    double s = 0;
    for (int i = 0; i < S.ndof(); ++i) s += S.w[i] * A.at(i).ddot(B.at(i));
    return s;
}

ScalarField lumped_project(const ScalarSpace& S, const std::function<double(Vec2)>& f,
                           int quad_degree) {
    const TriMesh& m = *S.mesh;
    const TriQuadRule rule = tri_rule(quad_degree);
    Vec num = Vec::Zero(S.ndof());
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const AffineMap map = m.affine_map(static_cast<int>(t));
        for (std::size_t q = 0; q < rule.pt.size(); ++q) {
            const double lx = rule.pt[q][0], ly = rule.pt[q][1];
            const Vec2 x{map.p0.x + map.A[0][0] * lx + map.A[0][1] * ly,
                         map.p0.y + map.A[1][0] * lx + map.A[1][1] * ly};
            const double fw = f(x) * rule.w[q] * map.det;
            const double lam[3] = {1.0 - lx - ly, lx, ly};
            for (int k = 0; k < 3; ++k) num[m.tri[t][k]] += fw * lam[k];
        }
    }
    ScalarField out;
    out.c = num.array() / S.w.array();
    return out;
}

// ------------------------------------------------------------------ evaluation
double eval_scalar(const ScalarSpace& S, const ScalarField& f, int t, Vec2 p) {
    const AffineMap map = S.mesh->affine_map(t);
    const Vec2 d = p - map.p0;
    const double lx = map.Ainv[0][0] * d.x + map.Ainv[0][1] * d.y;
    const double ly = map.Ainv[1][0] * d.x + map.Ainv[1][1] * d.y;
    const auto& tv = S.mesh->tri[t];
    return (1.0 - lx - ly) * f.c[tv[0]] + lx * f.c[tv[1]] + ly * f.c[tv[2]];
}

Vec2 eval_velocity(const VelocitySpace& V, const VelocityField& f, int t, Vec2 p) {
    const AffineMap map = V.mesh->affine_map(t);
    const Vec2 d = p - map.p0;
    const double lx = map.Ainv[0][0] * d.x + map.Ainv[0][1] * d.y;
    const double ly = map.Ainv[1][0] * d.x + map.Ainv[1][1] * d.y;
    double N[6];
    int nodes[6];
    V.shapes(lx, ly, N);
    V.cell_nodes(t, nodes);
    Vec2 out{0, 0};
    for (int k = 0; k < V.cell_dofs(); ++k) {
        out.x += N[k] * f.c[V.dof(0, nodes[k])];
        out.y += N[k] * f.c[V.dof(1, nodes[k])];
    }
    return out;
}

// --------------------------------------------------------------------- norms
double l2_norm(const ScalarSpace& S, const Vec& f) {
    const TriMesh& m = *S.mesh;
    double s = 0;
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const auto& tv = m.tri[t];
        const double u0 = f[tv[0]], u1 = f[tv[1]], u2 = f[tv[2]];
        const double area = m.affine_map(static_cast<int>(t)).det / 2.0;
        s += area / 6.0 * (u0 * u0 + u1 * u1 + u2 * u2 + u0 * u1 + u1 * u2 + u2 * u0);
    }
    return std::sqrt(s);
}

double h1_seminorm(const ScalarSpace& S, const Vec& f) {
    const TriMesh& m = *S.mesh;
    double s = 0;
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const auto& tv = m.tri[t];
        const AffineMap map = m.affine_map(static_cast<int>(t));
        static const double dl[3][2] = {{-1, -1}, {1, 0}, {0, 1}};
        double gx = 0, gy = 0;
        for (int k = 0; k < 3; ++k) {
            const double px = map.Ainv[0][0] * dl[k][0] + map.Ainv[1][0] * dl[k][1];
            const double py = map.Ainv[0][1] * dl[k][0] + map.Ainv[1][1] * dl[k][1];
            gx += f[tv[k]] * px;
            gy += f[tv[k]] * py;
        }
        s += map.det / 2.0 * (gx * gx + gy * gy);
    }
    return std::sqrt(s);
}

double lumped_norm(const ScalarSpace& S, const Vec& f) {
    return std::sqrt((S.w.array() * f.array() * f.array()).sum());
}

double linf_norm(const Vec& f) { return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff(); }

}  // namespace vpf
