#include "vpf/propcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "vpf/fespace.hpp"
#include "vpf/lambda_op.hpp"
#include "vpf/mesh.hpp"
#include "vpf/symmat.hpp"

namespace vpf {

namespace {

// rotation times log-uniform eigenvalues in [0.05, 20]
SymMat2 random_spd(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> logev(std::log(0.05), std::log(20.0));
    const double th = ang(rng);
    const double c = std::cos(th), s = std::sin(th);
    const double l1 = std::exp(logev(rng)), l2 = std::exp(logev(rng));
    SymMat2 m;
    m.a[0] = c * c * l1 + s * s * l2;
    m.a[1] = s * s * l1 + c * c * l2;
    m.a[2] = c * s * (l1 - l2);
    return m;
}

}  // namespace

ChainRuleSweep chain_rule_sweep(std::uint64_t seed, int n_configs) {
    const TriMesh mesh = build_structured(Box{-5, -5, 5, 5}, 8, {});
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> tpick(0, static_cast<int>(mesh.tri.size()) - 1);
    const std::optional<double> deltas[] = {0.5, 0.1, 0.01, std::nullopt};

    ChainRuleSweep out;
    out.lambda_min = std::numeric_limits<double>::infinity();
    out.lambda_max = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_configs; ++k) {
        const AffineMap map = mesh.affine_map(tpick(rng));
        Eigen::Matrix2d A;
        A << map.A[0][0], map.A[0][1], map.A[1][0], map.A[1][1];
        const std::array<SymMat2, 3> Bv{random_spd(rng), random_spd(rng), random_spd(rng)};
        for (const auto& d : deltas) {
            const LambdaElement<2> el = build_lambda<2>(Bv, A, d);
            out.max_residual = std::max(out.max_residual, chain_rule_residual<2>(el, Bv, d));
            for (int m = 0; m < 2; ++m) {
                out.lambda_min = std::min(out.lambda_min, el.coef[m]);
                out.lambda_max = std::max(out.lambda_max, el.coef[m]);
            }
        }
        ++out.configs;
    }
    return out;
}

double gradient_log_sweep(std::uint64_t seed, int n_fields) {
    const TriMesh mesh = build_structured(Box{-5, -5, 5, 5}, 4, {});
    std::mt19937_64 rng(seed);
    const int nv = static_cast<int>(mesh.vertex.size());
    const double deltas[] = {0.5, 0.1, 0.01};
    const double dl[3][2] = {{-1, -1}, {1, 0}, {0, 1}};

    double min_slack = std::numeric_limits<double>::infinity();
    std::vector<SymMat2> B(nv);
    for (int f = 0; f < n_fields; ++f) {
        for (auto& b : B) b = random_spd(rng);
        for (double delta : deltas) {
            for (std::size_t t = 0; t < mesh.tri.size(); ++t) {
                const AffineMap map = mesh.affine_map(static_cast<int>(t));
                const double areaK = 0.5 * map.det;
                double g[3][2];
                for (int k = 0; k < 3; ++k)
                    for (int c = 0; c < 2; ++c)
                        g[k][c] = map.Ainv[0][c] * dl[k][0] + map.Ainv[1][c] * dl[k][1];
                SymMat2 Bv[3], Cv[3];
                double sv[3];
                for (int k = 0; k < 3; ++k) {
                    Bv[k] = B[mesh.tri[t][k]];
                    Cv[k] = beta_delta_inv(Bv[k], delta);
                    sv[k] = tr_ln_beta_delta(Bv[k], delta);
                }
                double lhs = 0;
                for (int m = 0; m < 3; ++m)
                    for (int mp = 0; mp < 3; ++mp)
                        lhs -= Bv[m].ddot(Cv[mp]) * (g[m][0] * g[mp][0] + g[m][1] * g[mp][1]);
                lhs *= areaK;
                double gx = 0, gy = 0;
                for (int m = 0; m < 3; ++m) {
                    gx += sv[m] * g[m][0];
                    gy += sv[m] * g[m][1];
                }
                const double rhs = 0.5 * areaK * (gx * gx + gy * gy);
                min_slack = std::min(min_slack, lhs - rhs);
            }
        }
    }
    return min_slack;
}

NormEquivSweep norm_equiv_sweep(std::uint64_t seed, int n_fields) {
    const TriMesh mesh = build_structured(Box{-5, -5, 5, 5}, 6, {});
    const ScalarSpace S(mesh);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    NormEquivSweep out;
    out.ratio_min = std::numeric_limits<double>::infinity();
    out.ratio_max = 0;
    Vec q(S.ndof());
    for (int f = 0; f < n_fields; ++f) {
        for (int i = 0; i < q.size(); ++i) q[i] = gauss(rng);
        const double ratio = lumped_norm(S, q) / l2_norm(S, q);
        out.ratio_min = std::min(out.ratio_min, ratio);
        out.ratio_max = std::max(out.ratio_max, ratio);
        ++out.fields;
    }
    return out;
}

ConsistencyOrder lambda_consistency_order() {
    const auto field = [](Vec2 p) {
        SymMat2 m;
        m.a[0] = 2.0 + 0.5 * std::sin(M_PI * p.x / 5.0);
        m.a[1] = 2.0 + 0.5 * std::cos(M_PI * p.y / 5.0);
        m.a[2] = 0.5 * std::sin(M_PI * (p.x + p.y) / 10.0);
        return m;
    };

    ConsistencyOrder out;
    const int ns[3] = {8, 16, 32};
    for (int lev = 0; lev < 3; ++lev) {
        const TriMesh mesh = build_structured(Box{-5, -5, 5, 5}, ns[lev], {});
        const ScalarSpace S(mesh);
        const MatrixField B = interpolate_matrix(S, field);
        const auto lam = build_lambda_field(mesh, B, std::nullopt, false);
        double err2 = 0;
        for (std::size_t t = 0; t < mesh.tri.size(); ++t) {
            const AffineMap map = mesh.affine_map(static_cast<int>(t));
            const double areaK = 0.5 * map.det;
            SymMat2 avg;
            for (int k = 0; k < 3; ++k) avg += B.at(mesh.tri[t][k]) * (1.0 / 3.0);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    SymMat2 d = lam[t].lam(i, j);
                    if (i == j) d = d - avg;
                    const double nrm = d.norm();
                    err2 += areaK * nrm * nrm;
                }
        }
        out.errors[lev] = std::sqrt(err2);
    }
    out.order = std::log2(out.errors[1] / out.errors[2]);
    return out;
}

}  // namespace vpf
