#pragma once

#include "qflow/potentials.hpp"

#include <vector>

namespace qflow {

/// One aggregated cutting plane: <w, delta_psi> >= loss_value - xi.
struct ConstraintRow {
    FeatureVector delta_psi;
    double loss_value = 0.0;
};

struct MasterQpResult {
    WeightVector w;
    double xi = 0.0;
    /// Primal objective 0.5 |w|^2 + C xi.
    double objective = 0.0;
    double dual_objective = 0.0;
    /// Multiplier per row (warm start for the next solve).
    Eigen::VectorXd alpha;
    int iterations = 0;
};

/// min 0.5 |w|^2 + C xi  s.t.  <w, delta_psi_r> >= loss_r - xi, xi >= 0.
/// Solved in the dual (alpha >= 0, sum alpha <= C) by pairwise coordinate ascent until the
/// largest KKT violation drops below `tol`. `warm_start` may hold fewer entries than rows.
MasterQpResult solve_master_qp(const std::vector<ConstraintRow>& rows, double C, const WeightLayout& layout,
                               const Eigen::VectorXd& warm_start = {}, double tol = 1e-9);

}  // namespace qflow
