#pragma once
// Conforming triangulations of axis-aligned rectangles, organized as a
// 2:1-balanced quadtree of cells. Uniform meshes split every cell along the
// (+1,+1) diagonal; cells with hanging edge midpoints are triangulated by a
// fan from the cell center, which keeps every angle at 45 or 90 degrees.
// Adaptive refinement is driven by an interface indicator (element-max of
// |grad phi_h|) and coarsening by per-cell below-threshold streaks.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vpf {

struct Vec2 {
    double x = 0, y = 0;
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

struct Box {
    double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

// axis-aligned segment on the domain boundary
struct Segment {
    double ax = 0, ay = 0, bx = 0, by = 0;
};

enum class BTag : int { neumann = 0, dirichlet = 1 };

struct Facet {
    int v0 = -1, v1 = -1;
    BTag tag = BTag::neumann;
};

// affine map x = p0 + A*xhat from the reference triangle
struct AffineMap {
    Vec2 p0;
    double A[2][2];     // columns are edge vectors P1-P0, P2-P0
    double Ainv[2][2];
    double det;         // = 2*|K| (positive orientation enforced)
};

class MeshError : public std::runtime_error {
public:
    explicit MeshError(const std::string& m) : std::runtime_error(m) {}
};

class TriMesh {
public:
    // triangulation
    std::vector<Vec2> vertex;
    std::vector<std::array<int, 3>> tri;
    std::vector<double> diam;       // h_K
    std::vector<int> tri_cell;      // owning quadtree leaf
    std::vector<Facet> bfacet;

    Box domain;
    int n_coarse = 0;
    std::vector<Segment> dirichlet;

    // quadtree; children ordered SW, SE, NW, NE
    struct Cell {
        int parent = -1;
        std::array<int, 4> child{-1, -1, -1, -1};
        int level = 0;
        std::int64_t ix = 0, iy = 0;  // cell coordinates at this level, global
        int streak = 0;               // consecutive below-threshold observations
        bool leaf() const { return child[0] < 0; }
    };
    std::vector<Cell> cells;
    std::vector<int> roots;  // row-major coarse grid
    std::vector<std::array<int, 2>> cell_tris;  // leaf -> [begin,end) in tri
    int max_level = 0;

    double area() const;
    double h_max() const;
    double h_min() const;
    AffineMap affine_map(int t) const;
    int locate(Vec2 p) const;   // containing triangle; nearest one on ties
    bool square_cells() const;

    // internal: rebuild vertex/tri/facet arrays from the quadtree
    void extract();

private:
    int find_cell(int level, std::int64_t ix, std::int64_t iy) const;
    bool edge_hanging(const Cell& c, int dir) const;
    friend TriMesh refine_near_interface(const TriMesh&, const std::vector<double>&,
                                         double, double);
    friend class Adaptor;
};

// n cells per axis; Dirichlet segments must be axis-aligned, lie on the
// boundary, and have endpoints on the coarse lattice (else MeshError).
TriMesh build_structured(const Box& domain, int n, const std::vector<Segment>& dirichlet);

// One adaptation pass: refine every cell whose indicator (element-max
// |grad phi_h|, dilated by one ring of neighbor cells) exceeds the threshold
// until h_K <= target_h; afterwards merge sibling quartets that stayed below
// the threshold for 5 consecutive passes (never beyond the coarse level).
// phi_vertex holds P1 vertex values on `m`. Deterministic; calling twice in a
// row with the transferred field returns an identical mesh.
TriMesh refine_near_interface(const TriMesh& m, const std::vector<double>& phi_vertex,
                              double target_h, double indicator_threshold);

// P1 evaluation helper used for transfer between nested meshes
double eval_p1(const TriMesh& m, const std::vector<double>& vertex_values, Vec2 p);

}  // namespace vpf
