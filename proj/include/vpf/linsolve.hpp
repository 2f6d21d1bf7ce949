#pragma once
// Preconditioned CG / BiCGStab on callables x -> A x, so the same code runs
// on assembled sparse matrices and on operator compositions (Schur
// complements). Convergence is ||b - A x||_2 <= tol * ||b||_2 and the report
// always carries the true final residual, recomputed from scratch.

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <string>
#include <utility>

#include "vpf/fespace.hpp"

namespace vpf {

struct LinSolveReport {
    int iterations = 0;
    double relative_residual = 0;
    bool converged = false;
    std::string method;
};

inline auto op(const SpMat& A) {
    return [&A](const Vec& x) -> Vec { return A * x; };
}

inline auto identity_prec() {
    return [](const Vec& r) -> Vec { return r; };
}

inline auto jacobi_prec(const SpMat& A) {
    Vec dinv = A.diagonal();
    for (int i = 0; i < dinv.size(); ++i) dinv[i] = dinv[i] != 0.0 ? 1.0 / dinv[i] : 1.0;
    return [dinv](const Vec& r) -> Vec { return dinv.asDiagonal() * r; };
}

class IlutPrecond {
    Eigen::IncompleteLUT<double> fact;

public:
    explicit IlutPrecond(const SpMat& A, double droptol = 1e-4, int fillfactor = 30) {
        fact.setDroptol(droptol);
        fact.setFillfactor(fillfactor);
        fact.compute(A);
    }
    Vec operator()(const Vec& r) const { return fact.solve(r); }
};

template <class MatVec, class Prec>
LinSolveReport cg(MatVec&& A, const Vec& b, Vec& x, Prec&& M, double tol, int max_iter) {
    LinSolveReport rep;
    rep.method = "cg";
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero(b.size());
        rep.converged = true;
        return rep;
    }
    if (x.size() != b.size()) x.setZero(b.size());
    Vec r = b - A(x);
    Vec z = M(r);
    Vec p = z;
    double rz = r.dot(z);
    const double target = tol * bnorm;
    for (int it = 0; it < max_iter; ++it) {
        if (r.norm() <= target) break;
        Vec q = A(p);
        const double pq = p.dot(q);
        if (!(std::abs(pq) > 0)) break;
        const double alpha = rz / pq;
        x += alpha * p;
        r -= alpha * q;
        ++rep.iterations;
        z = M(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    rep.relative_residual = (b - A(x)).norm() / bnorm;
    rep.converged = rep.relative_residual <= tol;
    return rep;
}

template <class MatVec, class Prec>
LinSolveReport bicgstab(MatVec&& A, const Vec& b, Vec& x, Prec&& M, double tol, int max_iter) {
    LinSolveReport rep;
    rep.method = "bicgstab";
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero(b.size());
        rep.converged = true;
        return rep;
    }
    if (x.size() != b.size()) x.setZero(b.size());
    Vec r = b - A(x);
    const Vec r0 = r;
    double rho = 1, alpha = 1, omega = 1;
    Vec v = Vec::Zero(b.size()), p = Vec::Zero(b.size());
    const double target = tol * bnorm;
    for (int it = 0; it < max_iter && r.norm() > target; ++it) {
        const double rho1 = r0.dot(r);
        if (std::abs(rho1) < 1e-300) break;
        if (it == 0) {
            p = r;
        } else {
            const double beta = (rho1 / rho) * (alpha / omega);
            p = r + beta * (p - omega * v);
        }
        const Vec ph = M(p);
        v = A(ph);
        const double r0v = r0.dot(v);
        if (std::abs(r0v) < 1e-300) break;
        alpha = rho1 / r0v;
        const Vec s = r - alpha * v;
        ++rep.iterations;
        if (s.norm() <= target) {
            x += alpha * ph;
            r = s;
            rho = rho1;
            break;
        }
        const Vec sh = M(s);
        const Vec t = A(sh);
        const double tt = t.dot(t);
        if (!(tt > 0)) break;
        omega = t.dot(s) / tt;
        x += alpha * ph + omega * sh;
        r = s - omega * t;
        rho = rho1;
        if (std::abs(omega) < 1e-300) break;
    }
    rep.relative_residual = (b - A(x)).norm() / bnorm;
    rep.converged = rep.relative_residual <= tol;
    return rep;
}

}  // namespace vpf
