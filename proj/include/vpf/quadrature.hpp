#pragma once
// Fixed quadrature tables on the reference triangle {(x,y): x,y>=0, x+y<=1}
// and the reference segment [0,1]. Weights sum to the reference measure.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace vpf {

struct TriQuadRule {
    std::vector<std::array<double, 2>> pt;
    std::vector<double> w;
};

struct SegQuadRule {
    std::vector<double> pt;
    std::vector<double> w;
};

// smallest table exact for polynomials of the requested total degree
inline const TriQuadRule& tri_rule(int degree) {
    static const TriQuadRule deg1{{{1.0 / 3, 1.0 / 3}}, {0.5}};
    static const TriQuadRule deg2{
        {{1.0 / 6, 1.0 / 6}, {2.0 / 3, 1.0 / 6}, {1.0 / 6, 2.0 / 3}},
        {1.0 / 6, 1.0 / 6, 1.0 / 6}};
    // 6-point rule, exact to degree 4 (two symmetric orbits)
    static const TriQuadRule deg4 = [] {
        TriQuadRule r;
        const double a = 0.445948490915965;
        const double b = 0.091576213509771;
        const double wa = 0.223381589678011 / 2.0;
        const double wb = 0.109951743655322 / 2.0;
        r.pt = {{a, a}, {1 - 2 * a, a}, {a, 1 - 2 * a},
                {b, b}, {1 - 2 * b, b}, {b, 1 - 2 * b}};
        r.w = {wa, wa, wa, wb, wb, wb};
        return r;
    }();
    // 7-point rule, exact to degree 5
    static const TriQuadRule deg5 = [] {
        TriQuadRule r;
        const double a = 0.470142064105115;
        const double b = 0.101286507323456;
        const double wa = 0.132394152788506 / 2.0;
        const double wb = 0.125939180544827 / 2.0;
        r.pt = {{1.0 / 3, 1.0 / 3},
                {a, a}, {1 - 2 * a, a}, {a, 1 - 2 * a},
                {b, b}, {1 - 2 * b, b}, {b, 1 - 2 * b}};
        r.w = {9.0 / 80, wa, wa, wa, wb, wb, wb};
        return r;
    }();
    if (degree <= 1) return deg1;
    if (degree <= 2) return deg2;
    if (degree <= 4) return deg4;
    if (degree <= 5) return deg5;
    throw std::invalid_argument("tri_rule: degree > 5 not tabulated");
}

inline const SegQuadRule& seg_rule(int degree) {
    static const SegQuadRule deg3 = [] {
        SegQuadRule r;
        const double d = 0.5 / std::sqrt(3.0);
        r.pt = {0.5 - d, 0.5 + d};
        r.w = {0.5, 0.5};
        return r;
    }();
    static const SegQuadRule deg5 = [] {
        SegQuadRule r;
        const double d = 0.5 * std::sqrt(3.0 / 5.0);
        r.pt = {0.5 - d, 0.5, 0.5 + d};
        r.w = {5.0 / 18, 8.0 / 18, 5.0 / 18};
        return r;
    }();
    if (degree <= 3) return deg3;
    if (degree <= 5) return deg5;
    throw std::invalid_argument("seg_rule: degree > 5 not tabulated");
}

}  // namespace vpf
