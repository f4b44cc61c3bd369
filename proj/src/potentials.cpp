#include "qflow/potentials.hpp"

#include "qflow/errors.hpp"

#include <cmath>
#include <string>

namespace qflow {

FlowSolution FlowSolution::zero(const TrackingGraph& g) {
    FlowSolution f;
    f.det = Eigen::VectorXd::Zero(g.num_nodes());
    f.birth = Eigen::VectorXd::Zero(g.num_nodes());
    f.death = Eigen::VectorXd::Zero(g.num_nodes());
    f.trans = Eigen::VectorXd::Zero(g.num_edges());
    return f;
}

bool FlowSolution::is_integral(double tol) const {
    auto integral = [tol](const Eigen::VectorXd& v) {
        for (double x : v)
            if (std::min(std::abs(x), std::abs(1.0 - x)) > tol) return false;
        return true;
    };
    return integral(det) && integral(birth) && integral(death) && integral(trans) && integral(pair);
}

double FlowSolution::pair_value(const TrackingGraph& g, int p) const {
    if (pair.size() > 0) return pair[p];
    const auto& pr = g.pairs()[p];
    return det[pr.i] * det[pr.j];
}

Eigen::VectorXd FlowSolution::stacked() const {
    Eigen::VectorXd out(det.size() + birth.size() + death.size() + trans.size());
    out << det, birth, death, trans;
    return out;
}

bool is_feasible(const TrackingGraph& g, const FlowSolution& f, double tol) {
    const int n = g.num_nodes();
    if (f.det.size() != n || f.birth.size() != n || f.death.size() != n || f.trans.size() != g.num_edges()) return false;
    if (f.pair.size() != 0 && f.pair.size() != g.num_pairs()) return false;
    auto in_unit = [tol](const Eigen::VectorXd& v) {
        return v.size() == 0 || (v.minCoeff() >= -tol && v.maxCoeff() <= 1.0 + tol);
    };
    if (!in_unit(f.det) || !in_unit(f.birth) || !in_unit(f.death) || !in_unit(f.trans) || !in_unit(f.pair)) return false;
    for (int i = 0; i < n; ++i) {
        double in = f.birth[i];
        for (int e : g.in_edges(i)) in += f.trans[e];
        double out = f.death[i];
        for (int e : g.out_edges(i)) out += f.trans[e];
        if (std::abs(in - f.det[i]) > tol || std::abs(out - f.det[i]) > tol) return false;
    }
    for (int p = 0; p < f.pair.size(); ++p) {
        const auto& pr = g.pairs()[p];
        const double u = f.pair[p];
        if (u > f.det[pr.i] + tol || u > f.det[pr.j] + tol || f.det[pr.i] + f.det[pr.j] > u + 1.0 + tol) return false;
    }
    return true;
}

void check_feasible(const TrackingGraph& g, const FlowSolution& f, double tol) {
    if (!is_feasible(g, f, tol)) throw InputError("flow violates conservation or bounds");
}

CostedGraph CostedGraph::zeros(std::shared_ptr<const TrackingGraph> g) {
    CostedGraph cg;
    cg.c_det = Eigen::VectorXd::Zero(g->num_nodes());
    cg.c_birth = Eigen::VectorXd::Zero(g->num_nodes());
    cg.c_death = Eigen::VectorXd::Zero(g->num_nodes());
    cg.c_trans = Eigen::VectorXd::Zero(g->num_edges());
    cg.q = Eigen::VectorXd::Zero(g->num_pairs());
    cg.graph = std::move(g);
    return cg;
}

Eigen::VectorXd transition_feature(const TransitionEdge& edge, int max_gap) {
    if (edge.gap < 1 || edge.gap > max_gap) throw InputError("transition gap " + std::to_string(edge.gap) + " out of range");
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(2 * max_gap);
    const int bin = 2 * (edge.gap - 1);
    phi[bin] = 1.0;
    phi[bin + 1] = edge.predicted_overlap < 0.5 ? 1.0 : 0.0;
    return phi;
}

Eigen::Vector2d appearance_feature(const Detection& det) { return {det.score, 1.0}; }

FeatureVector pairwise_feature(const PairwisePair& pair, int class_i, int class_j, const WeightLayout& layout) {
    if (class_i < 0 || class_i >= layout.num_classes || class_j < 0 || class_j >= layout.num_classes)
        throw InputError("pairwise class out of range");
    FeatureVector psi(layout);
    psi.pairwise_block(class_i, class_j) = pair.relation;
    return psi;
}

FeatureVector features_of_flow(const TrackingGraph& g, const FlowSolution& f) {
    check_feasible(g, f);
    const auto layout = WeightLayout::of(g);
    FeatureVector psi(layout);
    const auto& dets = g.detections();
    for (int i = 0; i < g.num_nodes(); ++i) {
        psi.birth() += f.birth[i];
        psi.death() += f.death[i];
        psi.appearance() += f.det[i] * appearance_feature(dets[i]);
    }
    for (int e = 0; e < g.num_edges(); ++e)
        if (f.trans[e] != 0.0) psi.transition() += f.trans[e] * transition_feature(g.edges()[e], layout.max_gap);
    for (int p = 0; p < g.num_pairs(); ++p) {
        const double u = f.pair_value(g, p);
        if (u == 0.0) continue;
        const auto& pr = g.pairs()[p];
        psi.pairwise_block(dets[pr.i].class_id, dets[pr.j].class_id) += u * pr.relation;
    }
    return psi;
}

CostedGraph assign_costs(std::shared_ptr<const TrackingGraph> g, const WeightVector& w) {
    const auto layout = WeightLayout::of(*g);
    if (!(w.layout() == layout)) throw InputError("weight layout does not match graph");
    CostedGraph cg = CostedGraph::zeros(g);
    const auto& dets = g->detections();
    for (int i = 0; i < g->num_nodes(); ++i) {
        cg.c_det[i] = -w.appearance().dot(appearance_feature(dets[i]));
        cg.c_birth[i] = -w.birth();
        cg.c_death[i] = -w.death();
    }
    for (int e = 0; e < g->num_edges(); ++e)
        cg.c_trans[e] = -w.transition().dot(transition_feature(g->edges()[e], layout.max_gap));
    for (int p = 0; p < g->num_pairs(); ++p) {
        const auto& pr = g->pairs()[p];
        cg.q[p] = -w.pairwise_block(dets[pr.i].class_id, dets[pr.j].class_id).dot(pr.relation);
    }
    return cg;
}

double linear_cost(const CostedGraph& cg, const FlowSolution& f) {
    return cg.c_det.dot(f.det) + cg.c_birth.dot(f.birth) + cg.c_death.dot(f.death) + cg.c_trans.dot(f.trans);
}

double flow_cost(const CostedGraph& cg, const FlowSolution& f) {
    check_feasible(cg.g(), f);
    double cost = linear_cost(cg, f);
    for (int p = 0; p < cg.q.size(); ++p)
        if (cg.q[p] != 0.0) cost += cg.q[p] * f.pair_value(cg.g(), p);
    return cost;
}

}  // namespace qflow
