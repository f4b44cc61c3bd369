#include "qflow/simplex.hpp"

#include "qflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace qflow {

int LinearProgram::add_var(double c, double lo, double hi) {
    const Eigen::Index n = cost.size();
    cost.conservativeResize(n + 1);
    lower.conservativeResize(n + 1);
    upper.conservativeResize(n + 1);
    cost[n] = c;
    lower[n] = lo;
    upper[n] = hi;
    return static_cast<int>(n);
}

void LinearProgram::add_row(std::vector<std::pair<int, double>> terms, RowSense sense, double rhs) {
    rows.push_back({std::move(terms), sense, rhs});
}

double max_violation(const LinearProgram& lp, const Eigen::VectorXd& x) {
    double worst = 0.0;
    for (int j = 0; j < lp.num_vars(); ++j) {
        worst = std::max(worst, lp.lower[j] - x[j]);
        worst = std::max(worst, x[j] - lp.upper[j]);
    }
    for (const auto& row : lp.rows) {
        double lhs = 0.0;
        for (auto [j, a] : row.terms) lhs += a * x[j];
        const double r = lhs - row.rhs;
        worst = std::max(worst, row.sense == RowSense::kEqual ? std::abs(r) : r);
    }
    return worst;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class BoundedSimplex {
public:
    BoundedSimplex(const LinearProgram& lp, const SimplexOptions& opt) : opt_(opt), n_struct_(lp.num_vars()) {
        m_ = static_cast<int>(lp.rows.size());
        cols_.resize(n_struct_);
        for (int r = 0; r < m_; ++r)
            for (auto [j, a] : lp.rows[r].terms)
                if (a != 0.0) cols_[j].push_back({r, a});
        lower_.assign(lp.lower.data(), lp.lower.data() + n_struct_);
        upper_.assign(lp.upper.data(), lp.upper.data() + n_struct_);
        cost_.assign(lp.cost.data(), lp.cost.data() + n_struct_);
        rhs_.resize(m_);
        for (int j = 0; j < n_struct_; ++j) {
            if (!std::isfinite(lower_[j])) throw InputError("simplex requires finite lower bounds");
            x_.push_back(lower_[j]);
            at_upper_.push_back(0);
        }

        // Logical column per row: slack for feasible <= rows, artificial otherwise.
        basis_.resize(m_);
        for (int r = 0; r < m_; ++r) {
            const auto& row = lp.rows[r];
            rhs_[r] = row.rhs;
            double lhs = 0.0;
            for (auto [j, a] : row.terms) lhs += a * x_[j];
            const double residual = row.rhs - lhs;
            if (row.sense == RowSense::kLessEqual && residual >= 0.0) {
                basis_[r] = add_logical(r, 1.0, residual, false);
            } else if (row.sense == RowSense::kLessEqual) {
                add_logical(r, 1.0, 0.0, false);  // slack, nonbasic at 0
                basis_[r] = add_logical(r, -1.0, -residual, true);
            } else {
                basis_[r] = add_logical(r, residual >= 0.0 ? 1.0 : -1.0, std::abs(residual), true);
            }
        }
        const int n = static_cast<int>(x_.size());
        pos_.assign(n, -1);
        for (int r = 0; r < m_; ++r) pos_[basis_[r]] = r;
        binv_ = Eigen::MatrixXd::Identity(m_, m_);
        for (int r = 0; r < m_; ++r) binv_(r, r) = 1.0 / cols_[basis_[r]][0].second;
        max_iter_ = opt.max_iterations > 0 ? opt.max_iterations : 20 * (m_ + n) + 1000;
    }

    SimplexResult solve() {
        SimplexResult result;
        bool has_artificial = std::any_of(artificial_.begin(), artificial_.end(), [](char a) { return a; });
        if (has_artificial) {
            std::vector<double> phase1(x_.size(), 0.0);
            for (size_t j = 0; j < x_.size(); ++j) phase1[j] = artificial_[j] ? 1.0 : 0.0;
            const auto status = iterate(phase1, false, result);
            double infeasibility = 0.0;
            for (size_t j = 0; j < x_.size(); ++j)
                if (artificial_[j]) infeasibility += x_[j];
            if (status == SimplexStatus::kIterationLimit) {
                result.status = status;
                return finish(result);
            }
            if (infeasibility > opt_.feasibility_tol) {
                result.status = SimplexStatus::kInfeasible;
                return finish(result);
            }
        }
        for (size_t j = 0; j < x_.size(); ++j)
            if (artificial_[j]) upper_[j] = 0.0;
        std::vector<double> phase2(x_.size(), 0.0);
        std::copy(cost_.begin(), cost_.end(), phase2.begin());
        result.status = iterate(phase2, opt_.record_objective, result);
        return finish(result);
    }

private:
    int add_logical(int row, double coef, double value, bool artificial) {
        cols_.push_back({{row, coef}});
        lower_.push_back(0.0);
        upper_.push_back(kInf);
        x_.push_back(value);
        at_upper_.push_back(0);
        artificial_.resize(cols_.size(), 0);
        artificial_.back() = artificial;
        return static_cast<int>(cols_.size()) - 1;
    }

    double objective(const std::vector<double>& c) const {
        double v = 0.0;
        for (size_t j = 0; j < x_.size(); ++j) v += c[j] * x_[j];
        return v;
    }

    void refactor() {
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
        for (int r = 0; r < m_; ++r)
            for (auto [row, a] : cols_[basis_[r]]) b(row, r) = a;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
        binv_ = lu.inverse();
        // x_B = B^-1 (rhs - N x_N)
        Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(rhs_.data(), m_);
        for (size_t j = 0; j < x_.size(); ++j) {
            if (pos_[j] >= 0 || x_[j] == 0.0) continue;
            for (auto [row, a] : cols_[j]) rhs[row] -= a * x_[j];
        }
        const Eigen::VectorXd xb = binv_ * rhs;
        for (int r = 0; r < m_; ++r) x_[basis_[r]] = xb[r];
    }

    SimplexStatus iterate(const std::vector<double>& c, bool record, SimplexResult& result) {
        const int n = static_cast<int>(x_.size());
        int streak = 0;
        int since_refactor = 0;
        // Refactoring costs O(m^3); amortise it against the O(m^2) pivots.
        const int refactor_every = std::max(opt_.refactor_every, m_);
        bool fresh_duals = true;
        Eigen::VectorXd cb(m_), alpha(m_), y(m_);
        for (;;) {
            if (result.iterations >= max_iter_) return SimplexStatus::kIterationLimit;
            if (fresh_duals) {
                for (int r = 0; r < m_; ++r) cb[r] = c[basis_[r]];
                y.noalias() = binv_.transpose() * cb;
                fresh_duals = false;
            }

            const bool bland = opt_.always_bland || streak >= opt_.degenerate_streak;
            int enter = -1;
            double best = 0.0, enter_d = 0.0;
            for (int j = 0; j < n; ++j) {
                if (pos_[j] >= 0 || upper_[j] - lower_[j] <= 0.0) continue;
                double d = c[j];
                for (auto [row, a] : cols_[j]) d -= y[row] * a;
                const bool improving = at_upper_[j] ? d > opt_.optimality_tol : d < -opt_.optimality_tol;
                if (!improving) continue;
                if (bland) {
                    enter = j;
                    enter_d = d;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    enter = j;
                    enter_d = d;
                }
            }
            if (enter < 0) return SimplexStatus::kOptimal;

            alpha.setZero();
            for (auto [row, a] : cols_[enter]) alpha += a * binv_.col(row);
            const double dir = at_upper_[enter] ? -1.0 : 1.0;

            // Ratio test: x_B(theta) = x_B - dir * theta * alpha.
            double theta = upper_[enter] - lower_[enter];
            int leave = -1;
            bool leave_to_upper = false;
            for (int r = 0; r < m_; ++r) {
                if (std::abs(alpha[r]) <= opt_.pivot_tol) continue;
                const int var = basis_[r];
                const double rate = -dir * alpha[r];
                double limit;
                bool to_upper;
                if (rate < 0.0) {
                    limit = (x_[var] - lower_[var]) / -rate;
                    to_upper = false;
                } else {
                    if (!std::isfinite(upper_[var])) continue;
                    limit = (upper_[var] - x_[var]) / rate;
                    to_upper = true;
                }
                limit = std::max(0.0, limit);
                bool take = limit < theta;
                if (!take && leave >= 0 && limit == theta) {
                    take = bland ? var < basis_[leave] : std::abs(alpha[r]) > std::abs(alpha[leave]);
                }
                if (take) {
                    theta = limit;
                    leave = r;
                    leave_to_upper = to_upper;
                }
            }
            if (!std::isfinite(theta)) return SimplexStatus::kUnbounded;

            x_[enter] += dir * theta;
            for (int r = 0; r < m_; ++r) x_[basis_[r]] -= dir * theta * alpha[r];
            streak = theta <= 1e-12 ? streak + 1 : 0;

            if (leave < 0) {
                at_upper_[enter] = !at_upper_[enter];
                x_[enter] = at_upper_[enter] ? upper_[enter] : lower_[enter];
            } else {
                const int out = basis_[leave];
                x_[out] = leave_to_upper ? upper_[out] : lower_[out];
                at_upper_[out] = leave_to_upper;
                pos_[out] = -1;
                basis_[leave] = enter;
                pos_[enter] = leave;
                at_upper_[enter] = 0;

                const Eigen::RowVectorXd pivot_row = binv_.row(leave) / alpha[leave];
                binv_.noalias() -= alpha * pivot_row;
                binv_.row(leave) = pivot_row;
                // The entering reduced cost becomes zero: y += d_q * (row `leave` of the new B^-1).
                y.noalias() += enter_d * pivot_row.transpose();
                if (++since_refactor >= refactor_every) {
                    refactor();
                    since_refactor = 0;
                    fresh_duals = true;
                }
            }
            ++result.iterations;
            if (record) result.objective_trace.push_back(objective(c));
        }
    }

    SimplexResult& finish(SimplexResult& result) {
        result.x.resize(n_struct_);
        for (int j = 0; j < n_struct_; ++j) {
            double v = x_[j];
            if (std::abs(v - lower_[j]) <= opt_.feasibility_tol) v = lower_[j];
            if (std::isfinite(upper_[j]) && std::abs(v - upper_[j]) <= opt_.feasibility_tol) v = upper_[j];
            result.x[j] = v;
        }
        result.objective = 0.0;
        for (int j = 0; j < n_struct_; ++j) result.objective += cost_[j] * result.x[j];
        return result;
    }

    SimplexOptions opt_;
    int n_struct_;
    int m_ = 0;
    int max_iter_ = 0;
    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> lower_, upper_, cost_, rhs_, x_;
    std::vector<char> at_upper_, artificial_;
    std::vector<int> basis_, pos_;
    Eigen::MatrixXd binv_;
};

}  // namespace

SimplexResult simplex_solve(const LinearProgram& lp, const SimplexOptions& options) {
    if (lp.lower.size() != lp.cost.size() || lp.upper.size() != lp.cost.size())
        throw InputError("linear program bound vectors have wrong size");
    BoundedSimplex solver(lp, options);
    return solver.solve();
}

}  // namespace qflow
