#pragma once

#include "qflow/potentials.hpp"
#include "qflow/simplex.hpp"

#include <optional>

namespace qflow {

/// Greedy shortest-path extraction; after each accepted path the unary costs of the
/// path's same-frame partners absorb q_ij + q_ji and the path's nodes are removed.
FlowSolution greedy_dp_quadratic(const CostedGraph& cg);

/// Two-pass residual DP with pairwise cost updates: partners of newly activated detections
/// gain q_ij + q_ji, partners of deactivated ones lose it.
FlowSolution twopass_dp_quadratic(const CostedGraph& cg);

/// Relaxed solution. `flow.pair` holds the product value for every ordered pair: the
/// auxiliary variable where one was instantiated and f_i f_j otherwise.
struct LpSolution {
    FlowSolution flow;
    /// Relaxed objective; a lower bound on the integral optimum when `hit_limit` is false.
    double objective = 0.0;
    bool integral = false;
    int iterations = 0;
    bool hit_limit = false;
    /// Phase-two objectives of every component solve, concatenated (when requested).
    std::vector<double> objective_trace;
};

/// LP relaxation with one auxiliary variable per unordered pair whose combined weight
/// q_ij + q_ji is nonzero. Only the side of the product linearisation that binds at the
/// optimum is added: u >= f_i + f_j - 1 for positive weight, u <= f_i, u <= f_j for negative.
/// Independent connected components are solved separately.
LpSolution lp_relax_solve(const CostedGraph& cg, const SimplexOptions& options = {});

/// Integral flow closest in Euclidean distance to the relaxed one.
FlowSolution round_euclidean(const CostedGraph& cg, const LpSolution& lp);
/// Integral minimiser of the linearisation that replaces products by the relaxed u.
FlowSolution round_underestimator(const CostedGraph& cg, const LpSolution& lp);

enum class QuadraticMethod { kGreedyDp, kTwopassDp, kLpRound };

struct QuadraticResult {
    FlowSolution flow;
    double final_cost = 0.0;
    /// Relaxed objective, only for kLpRound.
    std::optional<double> lower_bound;
};

QuadraticResult solve_quadratic(const CostedGraph& cg, QuadraticMethod method);

/// (final - lower) / |lower|, with 0 when both are 0.
double relative_gap(double final_cost, double lower_bound);

}  // namespace qflow
