#pragma once
// Randomized property sweeps over the tensor calculus and the lumped-product
// machinery. Shared by the `check` subcommand and the acceptance suite.

#include <array>
#include <cstdint>

namespace vpf {

struct ChainRuleSweep {
    int configs = 0;
    double max_residual = 0;   // relative chain-rule defect
    double lambda_min = 0;     // range of interpolation coefficients
    double lambda_max = 0;
};
// random SPD vertex tensors on random structured-mesh triangles, regularized
// (delta in {0.5, 0.1, 0.01}) and unregularized
ChainRuleSweep chain_rule_sweep(std::uint64_t seed, int n_configs);

// min over elements/fields of the gradient-log inequality slack
//   -<grad B, grad I_h[binv_delta(B)]>_K - (1/2)|grad I_h[tr ln beta_delta(B)]|_K^2
double gradient_log_sweep(std::uint64_t seed, int n_fields);

struct NormEquivSweep {
    int fields = 0;
    double ratio_min = 0, ratio_max = 0;  // lumped norm over L2 norm
};
NormEquivSweep norm_equiv_sweep(std::uint64_t seed, int n_fields);

struct ConsistencyOrder {
    std::array<double, 3> errors{};  // L2 distance of Lambda_{i,j} to delta_{ij} B_h
    double order = 0;                // slope from the last halving
};
ConsistencyOrder lambda_consistency_order();

}  // namespace vpf
