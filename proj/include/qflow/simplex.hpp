#pragma once

#include <Eigen/Dense>

#include <limits>
#include <utility>
#include <vector>

namespace qflow {

enum class RowSense { kEqual, kLessEqual };

/// min c^T x  s.t.  rows (= or <=) rhs,  lower <= x <= upper.  Lower bounds must be finite.
struct LinearProgram {
    Eigen::VectorXd cost, lower, upper;
    struct Row {
        std::vector<std::pair<int, double>> terms;
        RowSense sense = RowSense::kLessEqual;
        double rhs = 0.0;
    };
    std::vector<Row> rows;

    int num_vars() const { return static_cast<int>(cost.size()); }
    int add_var(double c, double lo = 0.0, double hi = std::numeric_limits<double>::infinity());
    void add_row(std::vector<std::pair<int, double>> terms, RowSense sense, double rhs);
};

struct SimplexOptions {
    double pivot_tol = 1e-9;
    double feasibility_tol = 1e-7;
    double optimality_tol = 1e-9;
    /// 0 selects 20 * (rows + columns) + 1000.
    int max_iterations = 0;
    int refactor_every = 100;
    /// Consecutive degenerate pivots after which pricing falls back to Bland's rule.
    int degenerate_streak = 30;
    bool always_bland = false;
    bool record_objective = false;
};

enum class SimplexStatus { kOptimal, kIterationLimit, kInfeasible, kUnbounded };

struct SimplexResult {
    SimplexStatus status = SimplexStatus::kOptimal;
    Eigen::VectorXd x;
    double objective = 0.0;
    int iterations = 0;
    /// Phase-two objective after every iteration, when requested.
    std::vector<double> objective_trace;
};

/// Bounded-variable primal simplex on a dense basis inverse. Two phases; Dantzig pricing
/// with Bland's rule on degenerate stretches (or always, with `always_bland`).
SimplexResult simplex_solve(const LinearProgram& lp, const SimplexOptions& options = {});

/// Max violation of rows and bounds at x.
double max_violation(const LinearProgram& lp, const Eigen::VectorXd& x);

}  // namespace qflow
