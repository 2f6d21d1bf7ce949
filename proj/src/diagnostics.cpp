#include "vpf/diagnostics.hpp"

#include <algorithm>
#include <limits>

namespace vpf {

double discrete_energy(const ScalarSpace& S, const SpMat& stiffness, const ModelParams& p,
                       const Vec& phi, const MatrixField& B) {
    double e = 0.5 * p.beta * p.eps * phi.dot(stiffness * phi);
    for (int i = 0; i < S.ndof(); ++i) {
        const SymMat2 Bi = B.at(i);
        e += S.w[i] * (p.beta / p.eps * psi(phi[i]) + 0.25 * Bi.ddot(Bi) +
                       0.5 * (kappa_value(p, phi[i]) * Bi.trace() - tr_ln_spd(Bi)));
    }
    return e;
}

double spd_margin(const MatrixField& B) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < B.size(); ++i) m = std::min(m, min_eig(B.at(i)));
    return m;
}

double tumour_volume(const ScalarSpace& S, const Vec& phi) {
    return (S.w.array() * (0.5 * (1.0 + phi.array()))).sum();
}

double phi_overshoot(const Vec& phi) {
    return std::max(0.0, phi.cwiseAbs().maxCoeff() - 1.0);
}

double sigma_h1(const ScalarSpace& S, const Vec& sigma) {
    const double l2 = l2_norm(S, sigma);
    const double h1 = h1_seminorm(S, sigma);
    return std::sqrt(l2 * l2 + h1 * h1);
}

}  // namespace vpf
