#pragma once
// Shared test fixtures: seeded RNG, random SPD matrices, convergence slopes.

#include <cmath>
#include <random>

#include "vpf/fespace.hpp"
#include "vpf/mesh.hpp"
#include "vpf/symmat.hpp"

namespace vpf::testing {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// rotation times log-uniform eigenvalues in [lo, hi]
inline SymMat2 random_spd(std::mt19937_64& g, double lo = 0.05, double hi = 20.0) {
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> logev(std::log(lo), std::log(hi));
    const double th = ang(g);
    const double c = std::cos(th), s = std::sin(th);
    const double l1 = std::exp(logev(g)), l2 = std::exp(logev(g));
    SymMat2 m;
    m.a[0] = c * c * l1 + s * s * l2;
    m.a[1] = s * s * l1 + c * c * l2;
    m.a[2] = c * s * (l1 - l2);
    return m;
}

inline TriMesh unit_square(int n) { return build_structured(Box{0, 0, 1, 1}, n, {}); }
inline TriMesh big_square(int n) { return build_structured(Box{-5, -5, 5, 5}, n, {}); }

// observed order from errors at h and h/2
inline double order(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace vpf::testing
