#pragma once
// Small symmetric-matrix value type (d = 2 or 3) with spectral calculus.
// Storage is the upper triangle: 2D (xx, yy, xy); 3D (xx, yy, zz, xy, xz, yz).
// Frobenius products count off-diagonal entries twice, as for full matrices.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace vpf {

class SpdError : public std::runtime_error {
public:
    double eigenvalue;
    explicit SpdError(double ev)
        : std::runtime_error("matrix not SPD: eigenvalue " + std::to_string(ev)),
          eigenvalue(ev) {}
};

template <int D>
struct SymMat {
    static_assert(D == 2 || D == 3, "only d=2,3 supported");
    static constexpr int N = D * (D + 1) / 2;
    std::array<double, N> a{};

    static constexpr int comp_index(int i, int j) {
        if (i == j) return i;
        // off-diagonals after the D diagonal slots, ordered (0,1),(0,2),(1,2)
        int p = std::min(i, j), q = std::max(i, j);
        if constexpr (D == 2) {
            (void)p; (void)q;
            return 2;
        } else {
            if (p == 0 && q == 1) return 3;
            if (p == 0 && q == 2) return 4;
            return 5;
        }
    }

    double operator()(int i, int j) const { return a[comp_index(i, j)]; }
    double& at(int i, int j) { return a[comp_index(i, j)]; }

    static SymMat identity() {
        SymMat m;
        for (int i = 0; i < D; ++i) m.a[i] = 1.0;
        return m;
    }
    static SymMat zero() { return SymMat{}; }

    SymMat operator+(const SymMat& o) const {
        SymMat r;
        for (int k = 0; k < N; ++k) r.a[k] = a[k] + o.a[k];
        return r;
    }
    SymMat operator-(const SymMat& o) const {
        SymMat r;
        for (int k = 0; k < N; ++k) r.a[k] = a[k] - o.a[k];
        return r;
    }
    SymMat operator*(double s) const {
        SymMat r;
        for (int k = 0; k < N; ++k) r.a[k] = a[k] * s;
        return r;
    }
    SymMat& operator+=(const SymMat& o) {
        for (int k = 0; k < N; ++k) a[k] += o.a[k];
        return *this;
    }

    double trace() const {
        double t = 0;
        for (int i = 0; i < D; ++i) t += a[i];
        return t;
    }

    // full Frobenius contraction A:B = sum_ij A_ij B_ij
    double ddot(const SymMat& o) const {
        double s = 0;
        for (int i = 0; i < D; ++i) s += a[i] * o.a[i];
        for (int k = D; k < N; ++k) s += 2.0 * a[k] * o.a[k];
        return s;
    }
    double norm() const { return std::sqrt(ddot(*this)); }

    Eigen::Matrix<double, D, D> full() const {
        Eigen::Matrix<double, D, D> M;
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) M(i, j) = (*this)(i, j);
        return M;
    }
    static SymMat from_full(const Eigen::Matrix<double, D, D>& M) {
        SymMat r;
        for (int i = 0; i < D; ++i) r.a[i] = M(i, i);
        if constexpr (D == 2) {
            r.a[2] = 0.5 * (M(0, 1) + M(1, 0));
        } else {
            r.a[3] = 0.5 * (M(0, 1) + M(1, 0));
            r.a[4] = 0.5 * (M(0, 2) + M(2, 0));
            r.a[5] = 0.5 * (M(1, 2) + M(2, 1));
        }
        return r;
    }
};

using SymMat2 = SymMat<2>;
using SymMat3 = SymMat<3>;

template <int D>
struct EigenPair {
    std::array<double, D> val;          // ascending
    Eigen::Matrix<double, D, D> vec;    // columns are eigenvectors
};

// Closed form for 2x2 with a guarded nearly-diagonal branch.
inline EigenPair<2> eigh(const SymMat2& m) {
    const double axx = m.a[0], ayy = m.a[1], axy = m.a[2];
    EigenPair<2> e;
    e.vec.setIdentity();
    const double scale = std::abs(axx) + std::abs(ayy);
    if (std::abs(axy) <= 1e-14 * std::max(scale, 1e-300)) {
        if (axx <= ayy) {
            e.val = {axx, ayy};
        } else {
            e.val = {ayy, axx};
            e.vec << 0, 1, 1, 0;
        }
        return e;
    }
    const double mean = 0.5 * (axx + ayy);
    const double half = 0.5 * (axx - ayy);
    const double r = std::hypot(half, axy);
    e.val = {mean - r, mean + r};
    // eigenvector for the larger eigenvalue, better-conditioned row
    double vx, vy;
    if (std::abs(e.val[1] - axx) >= std::abs(e.val[1] - ayy)) {
        vx = axy;
        vy = e.val[1] - axx;
    } else {
        vx = e.val[1] - ayy;
        vy = axy;
    }
    const double n = std::hypot(vx, vy);
    vx /= n;
    vy /= n;
    e.vec(0, 1) = vx;
    e.vec(1, 1) = vy;
    e.vec(0, 0) = -vy;
    e.vec(1, 0) = vx;
    return e;
}

// Cyclic Jacobi for 3x3.
inline EigenPair<3> eigh(const SymMat3& m) {
    Eigen::Matrix3d A = m.full();
    Eigen::Matrix3d V = Eigen::Matrix3d::Identity();
    const double fro = std::max(A.norm(), 1e-300);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::sqrt(A(0, 1) * A(0, 1) + A(0, 2) * A(0, 2) + A(1, 2) * A(1, 2));
        if (off <= 1e-15 * fro) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(A(p, q)) <= 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                Eigen::Matrix3d J = Eigen::Matrix3d::Identity();
                J(p, p) = c;
                J(q, q) = c;
                J(p, q) = s;
                J(q, p) = -s;
                A = J.transpose() * A * J;
                A(p, q) = A(q, p) = 0.0;
                V = V * J;
            }
        }
    }
    EigenPair<3> e;
    std::array<int, 3> ord = {0, 1, 2};
    std::array<double, 3> d = {A(0, 0), A(1, 1), A(2, 2)};
    std::sort(ord.begin(), ord.end(), [&](int i, int j) { return d[i] < d[j]; });
    for (int k = 0; k < 3; ++k) {
        e.val[k] = d[ord[k]];
        e.vec.col(k) = V.col(ord[k]);
    }
    return e;
}

template <int D>
double min_eig(const SymMat<D>& m) {
    return eigh(m).val[0];
}

template <int D, class F>
SymMat<D> spectral_apply(const SymMat<D>& m, F f) {
    auto e = eigh(m);
    Eigen::Matrix<double, D, D> R = Eigen::Matrix<double, D, D>::Zero();
    for (int k = 0; k < D; ++k)
        R += f(e.val[k]) * (e.vec.col(k) * e.vec.col(k).transpose());
    return SymMat<D>::from_full(R);
}

template <int D, class F>
double spectral_trace(const SymMat<D>& m, F f) {
    auto e = eigh(m);
    double t = 0;
    for (int k = 0; k < D; ++k) t += f(e.val[k]);
    return t;
}

// ---------------------------------------------------------------------------
// Regularized scalar functions. g is a C^1 extension of ln below delta, beta
// its inverse-derivative (a clamp at delta), f the matching antiderivative of
// beta (quadratic above delta, linear below).
inline double g_delta(double s, double delta) {
    if (!(delta > 0)) throw std::invalid_argument("g_delta: delta must be positive");
    return s < delta ? s / delta + std::log(delta) - 1.0 : std::log(s);
}

inline double beta_delta(double s, double delta) {
    if (!(delta > 0)) throw std::invalid_argument("beta_delta: delta must be positive");
    return std::max(s, delta);
}

inline double f_delta(double s, double delta) {
    if (!(delta > 0)) throw std::invalid_argument("f_delta: delta must be positive");
    return s >= delta ? 0.5 * s * s : delta * s - 0.5 * delta * delta;
}

inline double g_delta_prime(double s, double delta) { return 1.0 / beta_delta(s, delta); }

template <int D>
SymMat<D> beta_delta(const SymMat<D>& m, double delta) {
    return spectral_apply(m, [delta](double s) { return beta_delta(s, delta); });
}

template <int D>
SymMat<D> beta_delta_inv(const SymMat<D>& m, double delta) {
    return spectral_apply(m, [delta](double s) { return 1.0 / beta_delta(s, delta); });
}

template <int D>
SymMat<D> g_delta_prime(const SymMat<D>& m, double delta) {
    return spectral_apply(m, [delta](double s) { return g_delta_prime(s, delta); });
}

template <int D>
double tr_g_delta(const SymMat<D>& m, double delta) {
    return spectral_trace(m, [delta](double s) { return g_delta(s, delta); });
}

template <int D>
double tr_f_delta(const SymMat<D>& m, double delta) {
    return spectral_trace(m, [delta](double s) { return f_delta(s, delta); });
}

template <int D>
double tr_ln_beta_delta(const SymMat<D>& m, double delta) {
    return spectral_trace(m, [delta](double s) { return std::log(beta_delta(s, delta)); });
}

// Frobenius norm of the negative part [m]_-
template <int D>
double neg_part_norm(const SymMat<D>& m) {
    auto e = eigh(m);
    double s = 0;
    for (int k = 0; k < D; ++k) {
        double v = std::min(e.val[k], 0.0);
        s += v * v;
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Unregularized (SPD-only) counterparts. Eigenvalues at or below kSpdFloor
// are treated as a hard SPD violation.
inline constexpr double kSpdFloor = 1e-12;

template <int D>
void require_spd(const SymMat<D>& m) {
    double ev = min_eig(m);
    if (ev <= kSpdFloor) throw SpdError(ev);
}

template <int D>
SymMat<D> inverse_spd(const SymMat<D>& m) {
    require_spd(m);
    return spectral_apply(m, [](double s) { return 1.0 / s; });
}

template <int D>
double tr_ln_spd(const SymMat<D>& m) {
    require_spd(m);
    return spectral_trace(m, [](double s) { return std::log(s); });
}

// symmetric product B*B (exact for symmetric input)
template <int D>
SymMat<D> square(const SymMat<D>& m) {
    return SymMat<D>::from_full((m.full() * m.full()).eval());
}

// elastic stress T_e(B, kappa) = B^2 + kappa B - I
template <int D>
SymMat<D> elastic_stress(const SymMat<D>& B, double kappa_value) {
    SymMat<D> r = square(B) + B * kappa_value;
    for (int i = 0; i < D; ++i) r.a[i] -= 1.0;
    return r;
}

}  // namespace vpf
