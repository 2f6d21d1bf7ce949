#pragma once
// Element-local operator Lambda_{i,j}(B_h) that substitutes for B_h in the
// convective stress terms so that a discrete chain rule holds exactly:
//   sum_j Lambda_{i,j}(B_h) : d_j I_h[-B_h + binv(B_h)]
//     = d_i I_h[-tr f(B_h) + tr ln binv(B_h)]   on each element,
// where (f, binv) = (f_delta, beta_delta^{-1}) in the regularized variant and
// (s^2/2, matrix inverse) in the SPD-only variant.
//
// Construction per element with vertex values B_0..B_D and map matrix A:
//   X_m   = B_m - binv(B_m) - B_0 + binv(B_0)
//   num_m = -tr f(B_m) + tr ln binv(B_m) + tr f(B_0) - tr ln binv(B_0)
//           + beta(B_m) : X_m
//   den_m = (beta(B_m) - beta(B_0)) : X_m
//   lhat_m = beta(B_m) + (num_m/den_m) (beta(B_0) - beta(B_m)),
// falling back to lhat_m = beta(B_m) when beta(B_m) ~ beta(B_0) or den_m is
// negligible against the numerator scale. Finally
//   Lambda_{i,j}|_K = sum_m [(A^T)^{-1}]_{i,m} [A^T]_{m,j} lhat_m.

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

#include "vpf/symmat.hpp"

namespace vpf {

template <int D>
struct LambdaElement {
    std::array<SymMat<D>, D> lhat;
    std::array<double, D> coef{};       // the interpolation coefficients lambda_m
    std::array<bool, D> degenerate{};   // fallback branch taken
    Eigen::Matrix<double, D, D> A;      // affine map matrix
    Eigen::Matrix<double, D, D> Ainv;

    SymMat<D> lam(int i, int j) const {
        SymMat<D> r;
        for (int m = 0; m < D; ++m) {
            double c = Ainv(m, i) * A(j, m);
            if (c != 0.0) r += lhat[m] * c;
        }
        return r;
    }
};

namespace detail {

template <int D>
struct RegFuncs {
    std::optional<double> delta;
    SymMat<D> beta(const SymMat<D>& B) const {
        return delta ? beta_delta(B, *delta) : B;
    }
    SymMat<D> binv(const SymMat<D>& B) const {
        return delta ? beta_delta_inv(B, *delta) : inverse_spd(B);
    }
    // s(B) = -tr f(B) + tr ln binv(B)
    double potential(const SymMat<D>& B) const {
        if (delta) return -tr_f_delta(B, *delta) - tr_ln_beta_delta(B, *delta);
        return -0.5 * B.ddot(B) - tr_ln_spd(B);
    }
};

}  // namespace detail

template <int D>
LambdaElement<D> build_lambda(const std::array<SymMat<D>, D + 1>& Bv,
                              const Eigen::Matrix<double, D, D>& A,
                              std::optional<double> delta) {
    detail::RegFuncs<D> rf{delta};
    LambdaElement<D> el;
    el.A = A;
    el.Ainv = A.inverse();

    const SymMat<D> beta0 = rf.beta(Bv[0]);
    const SymMat<D> binv0 = rf.binv(Bv[0]);
    const double s0 = rf.potential(Bv[0]);

    for (int m = 0; m < D; ++m) {
        const SymMat<D>& Bm = Bv[m + 1];
        const SymMat<D> betam = rf.beta(Bm);
        const SymMat<D> Xm = Bm - rf.binv(Bm) - Bv[0] + binv0;
        const double num = rf.potential(Bm) - s0 + betam.ddot(Xm);
        const double den = (betam - beta0).ddot(Xm);

        const double bdiff = (betam - beta0).norm();
        const double bscale = std::max({1.0, betam.norm(), beta0.norm()});
        const double nscale = std::max({1.0, std::abs(rf.potential(Bm) - s0),
                                        std::abs(betam.ddot(Xm))});
        if (bdiff <= 1e-12 * bscale || std::abs(den) <= 1e-14 * nscale) {
            el.lhat[m] = betam;
            el.coef[m] = 0.0;
            el.degenerate[m] = true;
        } else {
            const double lm = num / den;
            el.lhat[m] = betam + (beta0 - betam) * lm;
            el.coef[m] = lm;
            el.degenerate[m] = false;
        }
    }
    return el;
}

// max over directions i of |lhs_i - rhs_i| / scale_i for the chain rule above
template <int D>
double chain_rule_residual(const LambdaElement<D>& el, const std::array<SymMat<D>, D + 1>& Bv,
                           std::optional<double> delta) {
    detail::RegFuncs<D> rf{delta};
    std::array<SymMat<D>, D + 1> F;
    std::array<double, D + 1> s;
    for (int m = 0; m <= D; ++m) {
        F[m] = rf.binv(Bv[m]) - Bv[m];
        s[m] = rf.potential(Bv[m]);
    }
    // d_j I_h[F] = sum_m Ainv(m, j) (F_{m+1} - F_0)
    std::array<SymMat<D>, D> dF;
    std::array<double, D> ds;
    for (int j = 0; j < D; ++j) {
        dF[j] = SymMat<D>::zero();
        ds[j] = 0;
        for (int m = 0; m < D; ++m) {
            dF[j] += (F[m + 1] - F[0]) * el.Ainv(m, j);
            ds[j] += el.Ainv(m, j) * (s[m + 1] - s[0]);
        }
    }
    double worst = 0;
    for (int i = 0; i < D; ++i) {
        double lhs = 0, mag = 0;
        for (int j = 0; j < D; ++j) {
            double t = el.lam(i, j).ddot(dF[j]);
            lhs += t;
            mag += std::abs(t);
        }
        const double rhs = ds[i];
        const double scale = std::max({1.0, std::abs(rhs), mag});
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return worst;
}

// per-element Lambda data for a P1 tensor field on a mesh; naive substitutes
// delta_{ij} times the element vertex average (then lam(i,j) is exactly that)
class TriMesh;
struct MatrixField;
std::vector<LambdaElement<2>> build_lambda_field(const TriMesh& mesh, const MatrixField& B,
                                                 std::optional<double> delta, bool naive);

}  // namespace vpf
