#include "qflow/oracle.hpp"

#include "qflow/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace qflow {

namespace {

void guard(const TrackingGraph& g) {
    if (g.num_nodes() > kOracleMaxNodes)
        throw InputError("oracle limited to " + std::to_string(kOracleMaxNodes) + " detections, got " +
                         std::to_string(g.num_nodes()));
}

// Depth-first enumeration over detections in topological order. `leaf` receives the
// running objective (with c == nullptr it is always 0).
class Enumerator {
public:
    Enumerator(const TrackingGraph& g, const CostedGraph* cg) : g_(g), cg_(cg), f_(FlowSolution::zero(g)), succ_taken_(g.num_nodes(), 0) {}

    template <typename Leaf>
    void run(Leaf&& leaf) {
        recurse(0, 0.0, leaf);
    }

    const FlowSolution& flow() const { return f_; }

private:
    double c(const Eigen::VectorXd CostedGraph::*member, int k) const { return cg_ ? (cg_->*member)[k] : 0.0; }

    double activation_cost(int i) const {
        if (!cg_) return 0.0;
        double v = cg_->c_det[i] + cg_->c_death[i];
        for (int p : g_.pairs_from(i)) {
            const int j = g_.pairs()[p].j;
            if (j < i && f_.det[j] > 0.5) v += cg_->q[p] + cg_->q[g_.reverse_pair(p)];
        }
        return v;
    }

    template <typename Leaf>
    void recurse(int i, double cost, Leaf& leaf) {
        if (i == g_.num_nodes()) {
            leaf(cost);
            return;
        }
        recurse(i + 1, cost, leaf);

        const double on = activation_cost(i);
        f_.det[i] = 1.0;
        f_.death[i] = 1.0;

        f_.birth[i] = 1.0;
        recurse(i + 1, cost + on + c(&CostedGraph::c_birth, i), leaf);
        f_.birth[i] = 0.0;

        for (int e : g_.in_edges(i)) {
            const int j = g_.edges()[e].src;
            if (f_.det[j] < 0.5 || succ_taken_[j]) continue;
            succ_taken_[j] = 1;
            f_.trans[e] = 1.0;
            f_.death[j] = 0.0;
            recurse(i + 1, cost + on + c(&CostedGraph::c_trans, e) - c(&CostedGraph::c_death, j), leaf);
            f_.death[j] = 1.0;
            f_.trans[e] = 0.0;
            succ_taken_[j] = 0;
        }

        f_.det[i] = 0.0;
        f_.death[i] = 0.0;
    }

    const TrackingGraph& g_;
    const CostedGraph* cg_;
    FlowSolution f_;
    std::vector<char> succ_taken_;
};

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index k = 0; k < a.size(); ++k)
        if (a[k] != b[k]) return a[k] < b[k];
    return false;
}

}  // namespace

void enumerate_flows(const TrackingGraph& g, const std::function<void(const FlowSolution&)>& visit) {
    guard(g);
    Enumerator en(g, nullptr);
    en.run([&](double) { visit(en.flow()); });
}

OracleResult brute_force_optimum(const CostedGraph& cg) {
    guard(cg.g());
    Enumerator en(cg.g(), &cg);
    OracleResult result;
    bool have = false;
    Eigen::VectorXd best_key;
    en.run([&](double cost) {
        ++result.num_feasible;
        const double tol = 1e-12 * (1.0 + std::abs(cost));
        if (!have || cost < result.best_cost - tol) {
            have = true;
            result.best_cost = cost;
            result.best_flow = en.flow();
            best_key = result.best_flow.stacked();
        } else if (std::abs(cost - result.best_cost) <= tol) {
            Eigen::VectorXd key = en.flow().stacked();
            if (lex_less(key, best_key)) {
                result.best_flow = en.flow();
                best_key = std::move(key);
            }
        }
    });
    result.best_cost = flow_cost(cg, result.best_flow);
    result.best_flow.objective = result.best_cost;
    return result;
}

}  // namespace qflow
