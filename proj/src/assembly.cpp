#include "vpf/assembly.hpp"

#include <Eigen/SparseCore>

#include "vpf/quadrature.hpp"

namespace vpf::assembly {

namespace {

using Triplet = Eigen::Triplet<double>;

struct P1Grads {
    double g[3][2];  // physical gradients of the barycentric shapes
};

P1Grads p1_grads(const AffineMap& map) {
    static const double dl[3][2] = {{-1, -1}, {1, 0}, {0, 1}};
    P1Grads out;
    for (int k = 0; k < 3; ++k)
        for (int c = 0; c < 2; ++c)
            out.g[k][c] = map.Ainv[0][c] * dl[k][0] + map.Ainv[1][c] * dl[k][1];
    return out;
}

// physical gradients of the velocity shapes at a reference point
void vel_grads(const VelocitySpace& V, const AffineMap& map, double lx, double ly,
               double g[6][2]) {
    double gr[6][2];
    V.shape_ref_grads(lx, ly, gr);
    for (int k = 0; k < V.cell_dofs(); ++k)
        for (int c = 0; c < 2; ++c)
            g[k][c] = map.Ainv[0][c] * gr[k][0] + map.Ainv[1][c] * gr[k][1];
}

}  // namespace

SpMat mass(const ScalarSpace& S) {
    const TriMesh& m = *S.mesh;
    std::vector<Triplet> trip;
    trip.reserve(m.tri.size() * 9);
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const auto& tv = m.tri[t];
        const double s = m.affine_map(static_cast<int>(t)).det / 24.0;  // |K|/12
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l)
                trip.emplace_back(tv[k], tv[l], s * (k == l ? 2.0 : 1.0));
    }
    SpMat M(S.ndof(), S.ndof());
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

SpMat stiffness(const ScalarSpace& S) {
    const TriMesh& m = *S.mesh;
    std::vector<Triplet> trip;
    trip.reserve(m.tri.size() * 9);
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const auto& tv = m.tri[t];
        const AffineMap map = m.affine_map(static_cast<int>(t));
        const P1Grads G = p1_grads(map);
        const double area = map.det / 2.0;
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l)
                trip.emplace_back(tv[k], tv[l],
                                  area * (G.g[k][0] * G.g[l][0] + G.g[k][1] * G.g[l][1]));
    }
    SpMat K(S.ndof(), S.ndof());
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

SpMat stiffness_coeff(const ScalarSpace& S, const Vec& mob) {
    const TriMesh& m = *S.mesh;
    std::vector<Triplet> trip;
    trip.reserve(m.tri.size() * 9);
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const auto& tv = m.tri[t];
        const AffineMap map = m.affine_map(static_cast<int>(t));
        const P1Grads G = p1_grads(map);
        const double area = map.det / 2.0;
        const double mbar = (mob[tv[0]] + mob[tv[1]] + mob[tv[2]]) / 3.0;  // exact for P1
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l)
                trip.emplace_back(tv[k], tv[l],
                                  area * mbar * (G.g[k][0] * G.g[l][0] + G.g[k][1] * G.g[l][1]));
    }
    SpMat K(S.ndof(), S.ndof());
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

SpMat boundary_mass(const ScalarSpace& S) {
    const TriMesh& m = *S.mesh;
    std::vector<Triplet> trip;
    trip.reserve(m.bfacet.size() * 4);
    for (const Facet& f : m.bfacet) {
        const Vec2 d = m.vertex[f.v1] - m.vertex[f.v0];
        const double len = d.norm();
        trip.emplace_back(f.v0, f.v0, len / 3.0);
        trip.emplace_back(f.v1, f.v1, len / 3.0);
        trip.emplace_back(f.v0, f.v1, len / 6.0);
        trip.emplace_back(f.v1, f.v0, len / 6.0);
    }
    SpMat M(S.ndof(), S.ndof());
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

SpMat viscous_block(const VelocitySpace& V, double two_eta) {
    const TriMesh& m = *V.mesh;
    const TriQuadRule rule = tri_rule(V.quad_degree());
    const int nd = V.cell_dofs();
    std::vector<Triplet> trip;
    trip.reserve(m.tri.size() * nd * nd * 4);
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const AffineMap map = m.affine_map(static_cast<int>(t));
        int nodes[6];
        V.cell_nodes(static_cast<int>(t), nodes);
        double loc[12][12] = {};
        for (std::size_t q = 0; q < rule.pt.size(); ++q) {
            double g[6][2];
            vel_grads(V, map, rule.pt[q][0], rule.pt[q][1], g);
            const double wq = rule.w[q] * map.det * two_eta * 0.5;
            for (int k = 0; k < nd; ++k)
                for (int l = 0; l < nd; ++l) {
                    const double dot = g[k][0] * g[l][0] + g[k][1] * g[l][1];
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b)
                            loc[a * nd + k][b * nd + l] +=
                                wq * ((a == b ? dot : 0.0) + g[k][b] * g[l][a]);
                }
        }
        for (int a = 0; a < 2; ++a)
            for (int k = 0; k < nd; ++k)
                for (int b = 0; b < 2; ++b)
                    for (int l = 0; l < nd; ++l)
                        trip.emplace_back(V.dof(a, nodes[k]), V.dof(b, nodes[l]),
                                          loc[a * nd + k][b * nd + l]);
    }
    SpMat A(V.ndof(), V.ndof());
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

SpMat divergence(const VelocitySpace& V, const ScalarSpace& P) {
    const TriMesh& m = *V.mesh;
    const TriQuadRule rule = tri_rule(V.quad_degree());
    const int nd = V.cell_dofs();
    std::vector<Triplet> trip;
    trip.reserve(m.tri.size() * nd * 6);
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const auto& tv = m.tri[t];
        const AffineMap map = m.affine_map(static_cast<int>(t));
        int nodes[6];
        V.cell_nodes(static_cast<int>(t), nodes);
        for (std::size_t q = 0; q < rule.pt.size(); ++q) {
            const double lx = rule.pt[q][0], ly = rule.pt[q][1];
            double g[6][2];
            vel_grads(V, map, lx, ly, g);
            const double lam[3] = {1.0 - lx - ly, lx, ly};
            const double wq = rule.w[q] * map.det;
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < nd; ++k)
                    for (int a = 0; a < 2; ++a)
                        trip.emplace_back(tv[i], V.dof(a, nodes[k]), wq * lam[i] * g[k][a]);
        }
    }
    SpMat B(P.ndof(), V.ndof());
    B.setFromTriplets(trip.begin(), trip.end());
    return B;
}

void eliminate_dirichlet(SpMat& A, const std::vector<int>& dofs, double diag) {
    std::vector<char> con(A.rows(), 0);
    for (int d : dofs) con[d] = 1;
    std::vector<Triplet> trip;
    trip.reserve(A.nonZeros());
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) {
            if (con[it.row()] || con[it.col()]) continue;
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                              it.value());
        }
    for (int d : dofs) trip.emplace_back(d, d, diag);
    A.setFromTriplets(trip.begin(), trip.end());
}

void zero_columns(SpMat& B, const std::vector<int>& dofs) {
    std::vector<char> con(B.cols(), 0);
    for (int d : dofs) con[d] = 1;
    std::vector<Triplet> trip;
    trip.reserve(B.nonZeros());
    for (int k = 0; k < B.outerSize(); ++k)
        for (SpMat::InnerIterator it(B, k); it; ++it) {
            if (con[it.col()]) continue;
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                              it.value());
        }
    B.setFromTriplets(trip.begin(), trip.end());
}

Vec convection_rhs(const ScalarSpace& S, const VelocitySpace& V, const VelocityField& v,
                   const Vec& phi) {
    const TriMesh& m = *S.mesh;
    const TriQuadRule rule = tri_rule(V.quad_degree());
    Vec out = Vec::Zero(S.ndof());
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const auto& tv = m.tri[t];
        const AffineMap map = m.affine_map(static_cast<int>(t));
        const P1Grads G = p1_grads(map);
        double gphi[2] = {0, 0};
        for (int k = 0; k < 3; ++k)
            for (int c = 0; c < 2; ++c) gphi[c] += phi[tv[k]] * G.g[k][c];
        int nodes[6];
        V.cell_nodes(static_cast<int>(t), nodes);
        for (std::size_t q = 0; q < rule.pt.size(); ++q) {
            const double lx = rule.pt[q][0], ly = rule.pt[q][1];
            double N[6];
            V.shapes(lx, ly, N);
            double vx = 0, vy = 0;
            for (int k = 0; k < V.cell_dofs(); ++k) {
                vx += N[k] * v.c[V.dof(0, nodes[k])];
                vy += N[k] * v.c[V.dof(1, nodes[k])];
            }
            const double val = (vx * gphi[0] + vy * gphi[1]) * rule.w[q] * map.det;
            const double lam[3] = {1.0 - lx - ly, lx, ly};
            for (int i = 0; i < 3; ++i) out[tv[i]] += val * lam[i];
        }
    }
    return out;
}

Vec momentum_rhs(const VelocitySpace& V, const MomentumRhsData& d) {
    const TriMesh& m = *V.mesh;
    const TriQuadRule rule = tri_rule(V.quad_degree());
    const int nd = V.cell_dofs();
    Vec out = Vec::Zero(V.ndof());
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const auto& tv = m.tri[t];
        const AffineMap map = m.affine_map(static_cast<int>(t));
        const P1Grads G = p1_grads(map);
        int nodes[6];
        V.cell_nodes(static_cast<int>(t), nodes);

        double gphi[2] = {0, 0}, gb[2] = {0, 0}, gk[2] = {0, 0};
        for (int k = 0; k < 3; ++k)
            for (int c = 0; c < 2; ++c) {
                gphi[c] += (*d.phi)[tv[k]] * G.g[k][c];
                if (d.b) gb[c] += (*d.b)[tv[k]] * G.g[k][c];
                if (d.kappa) gk[c] += (*d.kappa)[tv[k]] * G.g[k][c];
            }
        // -1/2 sum_j d_j[kappa] tr Lambda_{i,j}, constant on the element
        double lam_term[2] = {0, 0};
        if (d.lambda) {
            const LambdaElement<2>& le = (*d.lambda)[t];
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) lam_term[i] -= 0.5 * gk[j] * le.lam(i, j).trace();
        }

        for (std::size_t q = 0; q < rule.pt.size(); ++q) {
            const double lx = rule.pt[q][0], ly = rule.pt[q][1];
            double N[6], g[6][2];
            V.shapes(lx, ly, N);
            vel_grads(V, map, lx, ly, g);
            const double lam[3] = {1.0 - lx - ly, lx, ly};
            SymMat2 Te = SymMat2::zero();
            double aval = 0;
            for (int k = 0; k < 3; ++k) {
                Te += d.Te->at(tv[k]) * lam[k];
                aval += (*d.a)[tv[k]] * lam[k];
            }
            const double wq = rule.w[q] * map.det;
            for (int k = 0; k < nd; ++k)
                for (int c = 0; c < 2; ++c) {
                    double val = -(Te(c, 0) * g[k][0] + Te(c, 1) * g[k][1]);
                    val += aval * gphi[c] * N[k];
                    if (d.lambda) val += (0.5 * gb[c] + lam_term[c]) * N[k];
                    out[V.dof(c, nodes[k])] += wq * val;
                }
        }
    }
    return out;
}

Vec vdotgrad_rhs(const ScalarSpace& S, const VelocitySpace& V, const VelocityField& v) {
    const TriMesh& m = *S.mesh;
    const TriQuadRule rule = tri_rule(V.quad_degree());
    Vec out = Vec::Zero(S.ndof());
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const auto& tv = m.tri[t];
        const AffineMap map = m.affine_map(static_cast<int>(t));
        const P1Grads G = p1_grads(map);
        int nodes[6];
        V.cell_nodes(static_cast<int>(t), nodes);
        double ivx = 0, ivy = 0;  // integral of v over the element
        for (std::size_t q = 0; q < rule.pt.size(); ++q) {
            double N[6];
            V.shapes(rule.pt[q][0], rule.pt[q][1], N);
            const double wq = rule.w[q] * map.det;
            for (int k = 0; k < V.cell_dofs(); ++k) {
                ivx += wq * N[k] * v.c[V.dof(0, nodes[k])];
                ivy += wq * N[k] * v.c[V.dof(1, nodes[k])];
            }
        }
        for (int i = 0; i < 3; ++i) out[tv[i]] += ivx * G.g[i][0] + ivy * G.g[i][1];
    }
    return out;
}

std::array<Vec, 4> gradv_rhs(const ScalarSpace& S, const VelocitySpace& V,
                             const VelocityField& v) {
    const TriMesh& m = *S.mesh;
    const TriQuadRule rule = tri_rule(V.quad_degree());
    std::array<Vec, 4> out;
    for (auto& o : out) o = Vec::Zero(S.ndof());
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const auto& tv = m.tri[t];
        const AffineMap map = m.affine_map(static_cast<int>(t));
        int nodes[6];
        V.cell_nodes(static_cast<int>(t), nodes);
        for (std::size_t q = 0; q < rule.pt.size(); ++q) {
            const double lx = rule.pt[q][0], ly = rule.pt[q][1];
            double g[6][2];
            vel_grads(V, map, lx, ly, g);
            double dv[2][2] = {};  // dv[a][b] = d_b v_a
            for (int k = 0; k < V.cell_dofs(); ++k)
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        dv[a][b] += g[k][b] * v.c[V.dof(a, nodes[k])];
            const double lam[3] = {1.0 - lx - ly, lx, ly};
            const double wq = rule.w[q] * map.det;
            for (int i = 0; i < 3; ++i)
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        out[2 * a + b][tv[i]] += wq * lam[i] * dv[a][b];
        }
    }
    return out;
}

Vec lambda_conv_rhs(const ScalarSpace& S, const VelocitySpace& V, const VelocityField& v,
                    const std::vector<LambdaElement<2>>& lambda, int comp) {
    const TriMesh& m = *S.mesh;
    const TriQuadRule rule = tri_rule(V.quad_degree());
    SymMat2 E = SymMat2::zero();
    E.a[comp] = 1.0;
    Vec out = Vec::Zero(S.ndof());
    for (std::size_t t = 0; t < m.tri.size(); ++t) {
        const auto& tv = m.tri[t];
        const AffineMap map = m.affine_map(static_cast<int>(t));
        const P1Grads G = p1_grads(map);
        const LambdaElement<2>& le = lambda[t];
        double s[2][2];
        for (int k = 0; k < 2; ++k)
            for (int j = 0; j < 2; ++j) s[k][j] = le.lam(k, j).ddot(E);
        int nodes[6];
        V.cell_nodes(static_cast<int>(t), nodes);
        double iv[2] = {0, 0};  // integral of v_k weighted later by s
        for (std::size_t q = 0; q < rule.pt.size(); ++q) {
            double N[6];
            V.shapes(rule.pt[q][0], rule.pt[q][1], N);
            const double wq = rule.w[q] * map.det;
            for (int k = 0; k < V.cell_dofs(); ++k) {
                iv[0] += wq * N[k] * v.c[V.dof(0, nodes[k])];
                iv[1] += wq * N[k] * v.c[V.dof(1, nodes[k])];
            }
        }
        for (int i = 0; i < 3; ++i) {
            double val = 0;
            for (int k = 0; k < 2; ++k)
                for (int j = 0; j < 2; ++j) val += iv[k] * s[k][j] * G.g[i][j];
            out[tv[i]] += val;
        }
    }
    return out;
}

}  // namespace vpf::assembly
