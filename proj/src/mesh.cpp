#include "vpf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace vpf {

namespace {

constexpr int kMaxLevel = 24;

// edge directions S, E, N, W
constexpr int kEdx[4] = {0, 1, 0, -1};
constexpr int kEdy[4] = {-1, 0, 1, 0};
// all 8 neighbor directions (edges then corners)
constexpr int kNdx[8] = {0, 1, 0, -1, 1, 1, -1, -1};
constexpr int kNdy[8] = {-1, 0, 1, 0, -1, 1, 1, -1};

double tri_diameter(Vec2 a, Vec2 b, Vec2 c) {
    return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
}

}  // namespace

// --------------------------------------------------------------------- queries

double TriMesh::area() const {
    double s = 0;
    for (size_t t = 0; t < tri.size(); ++t) {
        Vec2 a = vertex[tri[t][0]], b = vertex[tri[t][1]], c = vertex[tri[t][2]];
        s += 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
    }
    return s;
}

double TriMesh::h_max() const {
    double h = 0;
    for (double d : diam) h = std::max(h, d);
    return h;
}

double TriMesh::h_min() const {
    double h = diam.empty() ? 0.0 : diam[0];
    for (double d : diam) h = std::min(h, d);
    return h;
}

AffineMap TriMesh::affine_map(int t) const {
    AffineMap m;
    Vec2 p0 = vertex[tri[t][0]], p1 = vertex[tri[t][1]], p2 = vertex[tri[t][2]];
    m.p0 = p0;
    m.A[0][0] = p1.x - p0.x;
    m.A[1][0] = p1.y - p0.y;
    m.A[0][1] = p2.x - p0.x;
    m.A[1][1] = p2.y - p0.y;
    m.det = m.A[0][0] * m.A[1][1] - m.A[0][1] * m.A[1][0];
    if (!(m.det > 0)) throw MeshError("degenerate or negatively oriented element");
    m.Ainv[0][0] = m.A[1][1] / m.det;
    m.Ainv[0][1] = -m.A[0][1] / m.det;
    m.Ainv[1][0] = -m.A[1][0] / m.det;
    m.Ainv[1][1] = m.A[0][0] / m.det;
    return m;
}

bool TriMesh::square_cells() const {
    double sx = domain.width() / n_coarse, sy = domain.height() / n_coarse;
    return std::abs(sx - sy) <= 1e-12 * std::max(sx, sy);
}

int TriMesh::find_cell(int level, std::int64_t ix, std::int64_t iy) const {
    if (ix < 0 || iy < 0) return -1;
    const std::int64_t nc = static_cast<std::int64_t>(n_coarse) << level;
    if (ix >= nc || iy >= nc) return -1;
    int cur = roots[(iy >> level) * n_coarse + (ix >> level)];
    for (int k = level - 1; k >= 0; --k) {
        if (cells[cur].leaf()) return cur;  // coarser ancestor covers the spot
        int dx = static_cast<int>((ix >> k) & 1);
        int dy = static_cast<int>((iy >> k) & 1);
        cur = cells[cur].child[dy * 2 + dx];
    }
    return cur;
}

bool TriMesh::edge_hanging(const Cell& c, int dir) const {
    int f = find_cell(c.level, c.ix + kEdx[dir], c.iy + kEdy[dir]);
    return f >= 0 && cells[f].level == c.level && !cells[f].leaf();
}

// ------------------------------------------------------------------ extraction

namespace {

// children of an internal cell adjacent to a given neighbor direction,
// seen from the cell that owns the direction (so dir = E means the neighbor's
// western children)
void adjacent_children(int dir8, int out[2], int& count) {
    switch (dir8) {
        case 0: out[0] = 2; out[1] = 3; count = 2; break;  // S -> their N row
        case 1: out[0] = 0; out[1] = 2; count = 2; break;  // E -> their W col
        case 2: out[0] = 0; out[1] = 1; count = 2; break;  // N -> their S row
        case 3: out[0] = 1; out[1] = 3; count = 2; break;  // W -> their E col
        case 4: out[0] = 2; count = 1; break;              // SE corner -> their NW
        case 5: out[0] = 0; count = 1; break;              // NE corner -> their SW
        case 6: out[0] = 1; count = 1; break;              // NW corner -> their SE
        case 7: out[0] = 3; count = 1; break;              // SW corner -> their NE
    }
}

}  // namespace

void TriMesh::extract() {
    vertex.clear();
    tri.clear();
    diam.clear();
    tri_cell.clear();
    bfacet.clear();
    cell_tris.assign(cells.size(), {0, 0});

    // leaves in deterministic DFS order
    std::vector<int> leaves;
    {
        std::vector<int> stack;
        for (auto it = roots.rbegin(); it != roots.rend(); ++it) stack.push_back(*it);
        while (!stack.empty()) {
            int c = stack.back();
            stack.pop_back();
            if (cells[c].leaf()) {
                leaves.push_back(c);
            } else {
                for (int k = 3; k >= 0; --k) stack.push_back(cells[c].child[k]);
            }
        }
    }

    max_level = 0;
    for (int c : leaves) max_level = std::max(max_level, cells[c].level);
    const int shift_total = max_level + 1;
    const std::int64_t R = static_cast<std::int64_t>(n_coarse) << shift_total;
    const double W = domain.width(), H = domain.height();
    const double tol = 1e-9 * std::max(W, H);

    std::unordered_map<std::int64_t, int> vid;
    vid.reserve(leaves.size() * 4);
    auto vertex_id = [&](std::int64_t gx, std::int64_t gy) {
        std::int64_t key = gx * (R + 1) + gy;
        auto it = vid.find(key);
        if (it != vid.end()) return it->second;
        int id = static_cast<int>(vertex.size());
        vertex.push_back({domain.x0 + static_cast<double>(gx) * W / static_cast<double>(R),
                          domain.y0 + static_cast<double>(gy) * H / static_cast<double>(R)});
        vid.emplace(key, id);
        return id;
    };

    auto in_segment = [&](Vec2 p, const Segment& s) {
        if (std::abs(s.ax - s.bx) <= tol) {  // vertical
            return std::abs(p.x - s.ax) <= tol && p.y >= std::min(s.ay, s.by) - tol &&
                   p.y <= std::max(s.ay, s.by) + tol;
        }
        return std::abs(p.y - s.ay) <= tol && p.x >= std::min(s.ax, s.bx) - tol &&
               p.x <= std::max(s.ax, s.bx) + tol;
    };
    auto tag_of = [&](int v0, int v1) {
        for (const Segment& s : dirichlet)
            if (in_segment(vertex[v0], s) && in_segment(vertex[v1], s)) return BTag::dirichlet;
        return BTag::neumann;
    };

    for (int ci : leaves) {
        const Cell& c = cells[ci];
        const int up = shift_total - c.level;
        const std::int64_t gx0 = c.ix << up, gy0 = c.iy << up;
        const std::int64_t gx1 = (c.ix + 1) << up, gy1 = (c.iy + 1) << up;
        const std::int64_t gxm = (gx0 + gx1) / 2, gym = (gy0 + gy1) / 2;

        bool hang[4];
        for (int d = 0; d < 4; ++d) {
            hang[d] = edge_hanging(c, d);
            if (hang[d]) {
                // conformity requires the refined neighbor's adjacent children
                // to be leaves (2:1 balance)
                int f = find_cell(c.level, c.ix + kEdx[d], c.iy + kEdy[d]);
                int adj[2], na;
                adjacent_children(d, adj, na);
                for (int k = 0; k < na; ++k)
                    if (!cells[cells[f].child[adj[k]]].leaf())
                        throw MeshError("mesh not 2:1 balanced");
            }
        }

        const int begin = static_cast<int>(tri.size());
        if (!hang[0] && !hang[1] && !hang[2] && !hang[3]) {
            int sw = vertex_id(gx0, gy0), se = vertex_id(gx1, gy0);
            int ne = vertex_id(gx1, gy1), nw = vertex_id(gx0, gy1);
            tri.push_back({sw, se, ne});
            tri.push_back({sw, ne, nw});
        } else {
            int ctr = vertex_id(gxm, gym);
            std::vector<int> ring;
            ring.push_back(vertex_id(gx0, gy0));                 // SW
            if (hang[0]) ring.push_back(vertex_id(gxm, gy0));    // S mid
            ring.push_back(vertex_id(gx1, gy0));                 // SE
            if (hang[1]) ring.push_back(vertex_id(gx1, gym));    // E mid
            ring.push_back(vertex_id(gx1, gy1));                 // NE
            if (hang[2]) ring.push_back(vertex_id(gxm, gy1));    // N mid
            ring.push_back(vertex_id(gx0, gy1));                 // NW
            if (hang[3]) ring.push_back(vertex_id(gx0, gym));    // W mid
            for (size_t k = 0; k < ring.size(); ++k)
                tri.push_back({ctr, ring[k], ring[(k + 1) % ring.size()]});
        }
        const int end = static_cast<int>(tri.size());
        cell_tris[ci] = {begin, end};
        for (int t = begin; t < end; ++t) {
            tri_cell.push_back(ci);
            diam.push_back(tri_diameter(vertex[tri[t][0]], vertex[tri[t][1]], vertex[tri[t][2]]));
        }

        // boundary facets (never hanging: boundary edges have no neighbor)
        const std::int64_t nc = static_cast<std::int64_t>(n_coarse) << c.level;
        if (c.iy == 0)
            bfacet.push_back({vertex_id(gx0, gy0), vertex_id(gx1, gy0), BTag::neumann});
        if (c.ix == nc - 1)
            bfacet.push_back({vertex_id(gx1, gy0), vertex_id(gx1, gy1), BTag::neumann});
        if (c.iy == nc - 1)
            bfacet.push_back({vertex_id(gx0, gy1), vertex_id(gx1, gy1), BTag::neumann});
        if (c.ix == 0)
            bfacet.push_back({vertex_id(gx0, gy0), vertex_id(gx0, gy1), BTag::neumann});
    }

    for (Facet& f : bfacet) f.tag = tag_of(f.v0, f.v1);
}

// ----------------------------------------------------------------- constructors

TriMesh build_structured(const Box& domain, int n, const std::vector<Segment>& dirichlet) {
    if (n < 1 || n > 4096) throw MeshError("cells per axis must be in [1, 4096]");
    if (!(domain.width() > 0) || !(domain.height() > 0))
        throw MeshError("degenerate domain box");

    const double tol = 1e-9 * std::max(domain.width(), domain.height());
    for (const Segment& s : dirichlet) {
        const bool vert = std::abs(s.ax - s.bx) <= tol;
        const bool horz = std::abs(s.ay - s.by) <= tol;
        if (vert == horz) throw MeshError("Dirichlet segment must be axis-aligned");
        if (vert) {
            if (std::abs(s.ax - domain.x0) > tol && std::abs(s.ax - domain.x1) > tol)
                throw MeshError("Dirichlet segment not on the domain boundary");
        } else {
            if (std::abs(s.ay - domain.y0) > tol && std::abs(s.ay - domain.y1) > tol)
                throw MeshError("Dirichlet segment not on the domain boundary");
        }
        // endpoints must land on the coarse lattice so facets resolve them
        auto on_lattice = [&](double v, double lo, double ext) {
            double t = (v - lo) / (ext / n);
            return std::abs(t - std::round(t)) <= 1e-9 * std::max(1.0, std::abs(t));
        };
        if (vert) {
            if (!on_lattice(s.ay, domain.y0, domain.height()) ||
                !on_lattice(s.by, domain.y0, domain.height()))
                throw MeshError("Dirichlet segment endpoints not on the coarse lattice");
        } else {
            if (!on_lattice(s.ax, domain.x0, domain.width()) ||
                !on_lattice(s.bx, domain.x0, domain.width()))
                throw MeshError("Dirichlet segment endpoints not on the coarse lattice");
        }
    }

    TriMesh m;
    m.domain = domain;
    m.n_coarse = n;
    m.dirichlet = dirichlet;
    m.cells.resize(static_cast<size_t>(n) * n);
    m.roots.resize(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            int id = j * n + i;
            m.roots[id] = id;
            m.cells[id].level = 0;
            m.cells[id].ix = i;
            m.cells[id].iy = j;
        }
    }
    m.extract();
    return m;
}

// --------------------------------------------------------------------- locate

int TriMesh::locate(Vec2 p) const {
    const double W = domain.width(), H = domain.height();
    Vec2 q{std::min(std::max(p.x, domain.x0), domain.x1),
           std::min(std::max(p.y, domain.y0), domain.y1)};
    int i = std::min(n_coarse - 1,
                     std::max(0, static_cast<int>((q.x - domain.x0) / (W / n_coarse))));
    int j = std::min(n_coarse - 1,
                     std::max(0, static_cast<int>((q.y - domain.y0) / (H / n_coarse))));
    int cur = roots[j * n_coarse + i];
    while (!cells[cur].leaf()) {
        const Cell& c = cells[cur];
        double sx = W / (static_cast<double>(n_coarse) * (1ll << c.level));
        double sy = H / (static_cast<double>(n_coarse) * (1ll << c.level));
        double cx = domain.x0 + (static_cast<double>(c.ix) + 0.5) * sx;
        double cy = domain.y0 + (static_cast<double>(c.iy) + 0.5) * sy;
        int dx = q.x >= cx ? 1 : 0;
        int dy = q.y >= cy ? 1 : 0;
        cur = cells[cur].child[dy * 2 + dx];
    }
    auto [b, e] = cell_tris[cur];
    int best = b;
    double best_min = -1e30;
    for (int t = b; t < e; ++t) {
        AffineMap mp = affine_map(t);
        double rx = q.x - mp.p0.x, ry = q.y - mp.p0.y;
        double l1 = mp.Ainv[0][0] * rx + mp.Ainv[0][1] * ry;
        double l2 = mp.Ainv[1][0] * rx + mp.Ainv[1][1] * ry;
        double mn = std::min({l1, l2, 1.0 - l1 - l2});
        if (mn > best_min) {
            best_min = mn;
            best = t;
        }
        if (mn >= -1e-12) return t;
    }
    return best;
}

double eval_p1(const TriMesh& m, const std::vector<double>& vals, Vec2 p) {
    int t = m.locate(p);
    AffineMap mp = m.affine_map(t);
    double rx = p.x - mp.p0.x, ry = p.y - mp.p0.y;
    double l1 = mp.Ainv[0][0] * rx + mp.Ainv[0][1] * ry;
    double l2 = mp.Ainv[1][0] * rx + mp.Ainv[1][1] * ry;
    return (1.0 - l1 - l2) * vals[m.tri[t][0]] + l1 * vals[m.tri[t][1]] + l2 * vals[m.tri[t][2]];
}

// ------------------------------------------------------------------ adaptation

class Adaptor {
public:
    static std::vector<int> leaves_of(const TriMesh& m) {
        std::vector<int> out, stack;
        for (auto it = m.roots.rbegin(); it != m.roots.rend(); ++it) stack.push_back(*it);
        while (!stack.empty()) {
            int c = stack.back();
            stack.pop_back();
            if (m.cells[c].leaf())
                out.push_back(c);
            else
                for (int k = 3; k >= 0; --k) stack.push_back(m.cells[c].child[k]);
        }
        return out;
    }

    static void split(TriMesh& m, int ci) {
        const TriMesh::Cell c = m.cells[ci];  // copy: push_back reallocates
        if (c.level + 1 > kMaxLevel) throw MeshError("refinement depth exceeded");
        for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
                TriMesh::Cell ch;
                ch.parent = ci;
                ch.level = c.level + 1;
                ch.ix = 2 * c.ix + dx;
                ch.iy = 2 * c.iy + dy;
                m.cells.push_back(ch);
                m.cells[ci].child[dy * 2 + dx] = static_cast<int>(m.cells.size()) - 1;
            }
        }
    }

    // enforce 2:1 balance across edges
    static void balance(TriMesh& m) {
        bool changed = true;
        while (changed) {
            changed = false;
            std::vector<int> ls = leaves_of(m);
            for (int ci : ls) {
                if (!m.cells[ci].leaf()) continue;
                const TriMesh::Cell c = m.cells[ci];
                for (int d = 0; d < 4; ++d) {
                    int f = m.find_cell(c.level, c.ix + kEdx[d], c.iy + kEdy[d]);
                    if (f < 0 || m.cells[f].level != c.level || m.cells[f].leaf()) continue;
                    int adj[2], na;
                    adjacent_children(d, adj, na);
                    bool deep = false;
                    for (int k = 0; k < na; ++k)
                        if (!m.cells[m.cells[f].child[adj[k]]].leaf()) deep = true;
                    if (deep) {
                        split(m, ci);
                        changed = true;
                        break;
                    }
                }
            }
        }
    }

    // leaves adjacent to cell ci in direction dir8 (descends into refined
    // neighbors, follows coarser ancestors)
    static void neighbor_leaves(const TriMesh& m, int ci, int dir8, std::vector<int>& out) {
        const TriMesh::Cell& c = m.cells[ci];
        int f = m.find_cell(c.level, c.ix + kNdx[dir8], c.iy + kNdy[dir8]);
        if (f < 0) return;
        if (m.cells[f].leaf()) {
            out.push_back(f);
            return;
        }
        // descend toward the shared edge/corner
        std::vector<int> stack{f};
        while (!stack.empty()) {
            int g = stack.back();
            stack.pop_back();
            if (m.cells[g].leaf()) {
                out.push_back(g);
                continue;
            }
            int adj[2], na;
            adjacent_children(dir8, adj, na);
            for (int k = 0; k < na; ++k) stack.push_back(m.cells[g].child[adj[k]]);
        }
    }

    // per-leaf element-max |grad phi_h|
    static std::vector<double> leaf_indicator(const TriMesh& m, const std::vector<double>& v) {
        std::vector<double> ind(m.cells.size(), 0.0);
        for (size_t t = 0; t < m.tri.size(); ++t) {
            AffineMap mp = m.affine_map(t);
            double d1 = v[m.tri[t][1]] - v[m.tri[t][0]];
            double d2 = v[m.tri[t][2]] - v[m.tri[t][0]];
            // grad = A^{-T} (d1, d2)
            double gx = mp.Ainv[0][0] * d1 + mp.Ainv[1][0] * d2;
            double gy = mp.Ainv[0][1] * d1 + mp.Ainv[1][1] * d2;
            double g = std::hypot(gx, gy);
            int c = m.tri_cell[t];
            ind[c] = std::max(ind[c], g);
        }
        return ind;
    }
};

TriMesh refine_near_interface(const TriMesh& mesh, const std::vector<double>& phi_vertex,
                              double target_h, double indicator_threshold) {
    if (phi_vertex.size() != mesh.vertex.size())
        throw MeshError("field size does not match mesh");
    if (!(target_h > 0)) throw MeshError("target h must be positive");
    if (!mesh.square_cells()) throw MeshError("adaptive refinement requires square cells");

    TriMesh r = mesh;
    std::vector<double> vals = phi_vertex;
    const double cell0 = mesh.domain.width() / mesh.n_coarse;

    std::vector<char> hot;
    for (int iter = 0; iter < 64; ++iter) {
        std::vector<double> ind = Adaptor::leaf_indicator(r, vals);
        std::vector<int> ls = Adaptor::leaves_of(r);
        hot.assign(r.cells.size(), 0);
        for (int c : ls) hot[c] = ind[c] > indicator_threshold ? 1 : 0;

        std::vector<int> marks;
        std::vector<int> nbr;
        for (int c : ls) {
            double s = cell0 / static_cast<double>(1ll << r.cells[c].level);
            if (std::sqrt(2.0) * s <= target_h) continue;
            bool want = hot[c] != 0;
            if (!want) {
                nbr.clear();
                for (int d = 0; d < 8 && !want; ++d) {
                    Adaptor::neighbor_leaves(r, c, d, nbr);
                    for (int g : nbr)
                        if (hot[g]) {
                            want = true;
                            break;
                        }
                    nbr.clear();
                }
            }
            if (want) marks.push_back(c);
        }
        if (marks.empty()) break;
        for (int c : marks) Adaptor::split(r, c);
        Adaptor::balance(r);
        r.extract();
        vals.resize(r.vertex.size());
        for (size_t i = 0; i < r.vertex.size(); ++i)
            vals[i] = eval_p1(mesh, phi_vertex, r.vertex[i]);
    }

    // streak bookkeeping on the final leaf set
    std::vector<int> ls = Adaptor::leaves_of(r);
    for (int c : ls) r.cells[c].streak = hot[c] ? 0 : r.cells[c].streak + 1;

    // coarsening: merge sibling quartets observed below threshold 5 times,
    // one level per pass, respecting 2:1 balance
    constexpr int kCoarsenStreak = 5;
    bool merged = false;
    for (size_t pi = 0; pi < r.cells.size(); ++pi) {
        TriMesh::Cell& p = r.cells[pi];
        if (p.leaf()) continue;
        bool ok = true;
        for (int k = 0; k < 4; ++k) {
            const TriMesh::Cell& ch = r.cells[p.child[k]];
            if (!ch.leaf() || ch.streak < kCoarsenStreak) ok = false;
        }
        if (!ok) continue;
        // the merged leaf must not sit next to leaves two levels deeper
        for (int d = 0; d < 4 && ok; ++d) {
            int f = r.find_cell(p.level, p.ix + kEdx[d], p.iy + kEdy[d]);
            if (f < 0 || r.cells[f].level != p.level || r.cells[f].leaf()) continue;
            int adj[2], na;
            adjacent_children(d, adj, na);
            for (int k = 0; k < na; ++k)
                if (!r.cells[r.cells[f].child[adj[k]]].leaf()) ok = false;
        }
        if (!ok) continue;
        p.child = {-1, -1, -1, -1};  // children remain unreachable
        p.streak = 0;
        merged = true;
    }
    if (merged) r.extract();
    return r;
}

}  // namespace vpf
