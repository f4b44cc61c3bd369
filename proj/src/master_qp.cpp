#include "qflow/master_qp.hpp"

#include "qflow/errors.hpp"

#include <algorithm>

namespace qflow {

MasterQpResult solve_master_qp(const std::vector<ConstraintRow>& rows, double C, const WeightLayout& layout,
                               const Eigen::VectorXd& warm_start, double tol) {
    if (!(C > 0.0)) throw InputError("C must be positive");
    const int m = static_cast<int>(rows.size());
    const Eigen::Index dim = layout.size();

    // Index 0 is the slack multiplier (psi = 0, loss = 0) that turns sum alpha <= C into an equality.
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(dim, m + 1);
    Eigen::VectorXd loss = Eigen::VectorXd::Zero(m + 1);
    for (int r = 0; r < m; ++r) {
        if (rows[r].delta_psi.size() != dim) throw InputError("constraint row has wrong dimension");
        psi.col(r + 1) = rows[r].delta_psi.values();
        loss[r + 1] = rows[r].loss_value;
    }
    const Eigen::MatrixXd gram = psi.transpose() * psi;

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m + 1);
    for (Eigen::Index r = 0; r < std::min<Eigen::Index>(warm_start.size(), m); ++r) alpha[r + 1] = std::max(0.0, warm_start[r]);
    const double used = alpha.sum();
    if (used > C) alpha *= C / used;
    alpha[0] = C - alpha.sum();

    // g_r = loss_r - <w, psi_r>, the partial derivative of the dual objective.
    Eigen::VectorXd grad = loss - gram * alpha;
    MasterQpResult result;
    const int max_iterations = 100000 * (m + 1);
    for (; result.iterations < max_iterations; ++result.iterations) {
        int up = 0, down = -1;
        for (int r = 0; r <= m; ++r) {
            if (grad[r] > grad[up]) up = r;
            if (alpha[r] > 0.0 && (down < 0 || grad[r] < grad[down])) down = r;
        }
        if (down < 0 || grad[up] - grad[down] <= tol) break;
        const double curvature = gram(up, up) + gram(down, down) - 2.0 * gram(up, down);
        double step = alpha[down];
        if (curvature > 0.0) step = std::min(step, (grad[up] - grad[down]) / curvature);
        alpha[up] += step;
        alpha[down] -= step;
        grad -= step * (gram.col(up) - gram.col(down));
    }

    result.alpha = alpha.tail(m);
    result.w = WeightVector(layout, psi * alpha);
    // Recompute exactly so the reported slack dominates every stored constraint.
    result.xi = 0.0;
    for (int r = 0; r < m; ++r)
        result.xi = std::max(result.xi, loss[r + 1] - result.w.values().dot(psi.col(r + 1)));
    const double w2 = result.w.values().squaredNorm();
    result.objective = 0.5 * w2 + C * result.xi;
    result.dual_objective = alpha.dot(loss) - 0.5 * w2;
    return result;
}

}  // namespace qflow
