#include "qflow/learning.hpp"

#include "qflow/errors.hpp"
#include "qflow/oracle.hpp"
#include "qflow/quadratic_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace qflow {

// ---------------------------------------------------------------------------
// Ground-truth flow

GroundTruthMapping map_ground_truth(const TrackingGraph& g, const std::vector<GroundTruthBox>& gts) {
    const int n = g.num_nodes();
    const auto& dets = g.detections();
    GroundTruthMapping m;
    m.flow = FlowSolution::zero(g);
    m.track_of.assign(n, -1);

    std::map<int, std::vector<int>> nodes_at;
    for (int i = 0; i < n; ++i) nodes_at[dets[i].frame].push_back(i);

    std::vector<const GroundTruthBox*> order;
    for (const auto& gt : gts)
        if (!gt.ambiguous) order.push_back(&gt);
    std::stable_sort(order.begin(), order.end(), [](const GroundTruthBox* a, const GroundTruthBox* b) {
        return a->frame != b->frame ? a->frame < b->frame : a->track_id < b->track_id;
    });
    for (const GroundTruthBox* gt : order) {
        auto it = nodes_at.find(gt->frame);
        if (it == nodes_at.end()) continue;
        int best = -1;
        for (int i : it->second) {
            if (m.track_of[i] >= 0 || dets[i].class_id != gt->class_id || iou(dets[i].box, gt->box) < kTruthIou) continue;
            if (best < 0 || dets[i].score > dets[best].score) best = i;
        }
        if (best >= 0) m.track_of[best] = gt->track_id;
    }

    // Longest claimed paths per identity, repeated until every claimed detection is covered.
    std::map<int, std::vector<int>> claimed;
    for (int i = 0; i < n; ++i)
        if (m.track_of[i] >= 0) claimed[m.track_of[i]].push_back(i);
    std::vector<char> used(n, 0);
    std::vector<int> length(n), link(n);
    for (const auto& [id, nodes] : claimed) {
        for (;;) {
            int end = -1;
            for (int i : nodes) {
                if (used[i]) continue;
                length[i] = 1;
                link[i] = -1;
                for (int e : g.in_edges(i)) {
                    const int j = g.edges()[e].src;
                    if (m.track_of[j] != id || used[j]) continue;
                    if (length[j] + 1 > length[i]) {
                        length[i] = length[j] + 1;
                        link[i] = e;
                    }
                }
                if (end < 0 || length[i] > length[end]) end = i;
            }
            if (end < 0) break;
            m.flow.death[end] = 1.0;
            for (int i = end;;) {
                used[i] = 1;
                m.flow.det[i] = 1.0;
                const int e = link[i];
                if (e < 0) {
                    m.flow.birth[i] = 1.0;
                    break;
                }
                m.flow.trans[e] = 1.0;
                i = g.edges()[e].src;
            }
        }
    }
    check_feasible(g, m.flow);
    return m;
}

// ---------------------------------------------------------------------------
// Loss

namespace {

bool on_ground_truth(const Box& box, int frame, int class_id, const std::vector<GroundTruthBox>& gts) {
    for (const auto& gt : gts)
        if (!gt.ambiguous && gt.frame == frame && gt.class_id == class_id && iou(box, gt.box) >= kTruthIou) return true;
    return false;
}

}  // namespace

TransitionClass classify_transition(const TrackingGraph& g, int edge, const std::vector<int>& track_of,
                                    const std::vector<GroundTruthBox>& gts) {
    const auto& e = g.edges()[edge];
    const auto& a = g.detections()[e.src];
    const auto& b = g.detections()[e.dst];
    const int ta = track_of[e.src], tb = track_of[e.dst];
    TransitionClass c;
    if (ta < 0 && tb < 0) c.type = TransitionType::kNN;
    else if (tb < 0) c.type = TransitionType::kPN;
    else if (ta < 0) c.type = TransitionType::kNP;
    else c.type = ta == tb ? TransitionType::kPPPlus : TransitionType::kPPMinus;

    for (int k = 1; k < e.gap; ++k) {
        const Box virt = lerp(a.box, b.box, double(k) / e.gap);
        if (on_ground_truth(virt, a.frame + k, a.class_id, gts)) ++c.true_virtual;
        else ++c.false_virtual;
    }
    return c;
}

double transition_loss(const TransitionClass& c) {
    const double tv = c.true_virtual, fv = c.false_virtual;
    switch (c.type) {
        case TransitionType::kNN: return tv + fv;
        case TransitionType::kPN:
        case TransitionType::kNP: return tv + fv + 1.0;
        case TransitionType::kPPPlus: return tv;
        case TransitionType::kPPMinus: return tv + fv + 2.0;
    }
    return 0.0;
}

LossVector loss_vector(const TrackingGraph& g, const std::vector<int>& track_of, const std::vector<GroundTruthBox>& gts) {
    LossVector l;
    l.det = Eigen::VectorXd::Ones(g.num_nodes());
    l.birth = Eigen::VectorXd::Ones(g.num_nodes());
    l.death = Eigen::VectorXd::Ones(g.num_nodes());
    l.trans.resize(g.num_edges());
    // Only labels of frames the graph spans can matter.
    std::vector<GroundTruthBox> local;
    for (const auto& gt : gts)
        if (gt.frame >= g.frame_range().first && gt.frame <= g.frame_range().second) local.push_back(gt);
    for (int e = 0; e < g.num_edges(); ++e) l.trans[e] = transition_loss(classify_transition(g, e, track_of, local));
    return l;
}

double LossVector::hamming(const FlowSolution& f, const FlowSolution& fhat) const {
    return det.dot((f.det - fhat.det).cwiseAbs()) + birth.dot((f.birth - fhat.birth).cwiseAbs()) +
           death.dot((f.death - fhat.death).cwiseAbs()) + trans.dot((f.trans - fhat.trans).cwiseAbs());
}

// ---------------------------------------------------------------------------
// Problems

namespace {

std::vector<Detection> drop_ambiguous(const std::vector<Detection>& dets, const std::vector<GroundTruthBox>& gts) {
    std::vector<Detection> kept;
    for (const auto& d : dets) {
        bool ambiguous = false;
        for (const auto& gt : gts)
            if (gt.ambiguous && gt.frame == d.frame && iou(gt.box, d.box) >= kTruthIou) ambiguous = true;
        if (!ambiguous) kept.push_back(d);
    }
    return kept;
}

}  // namespace

TrainingProblem make_training_problem(const Sequence& seq, const GraphParams& params) {
    TrainingProblem p;
    p.graph = std::make_shared<const TrackingGraph>(build_graph(drop_ambiguous(seq.detections, seq.gts), params));
    const auto mapping = map_ground_truth(*p.graph, seq.gts);
    p.gt_flow = mapping.flow;
    p.gt_features = features_of_flow(*p.graph, p.gt_flow);
    p.loss = loss_vector(*p.graph, mapping.track_of, seq.gts);
    return p;
}

std::vector<TrainingProblem> chunk_sequences(const Sequence& seq, int length, int overlap, const GraphParams& params) {
    if (length <= overlap || overlap < 0) throw InputError("chunk length must exceed overlap >= 0");
    if (seq.detections.empty() && seq.gts.empty()) return {};
    int first = std::numeric_limits<int>::max(), last = std::numeric_limits<int>::min();
    for (const auto& d : seq.detections) first = std::min(first, d.frame), last = std::max(last, d.frame);
    for (const auto& gt : seq.gts) first = std::min(first, gt.frame), last = std::max(last, gt.frame);

    std::vector<TrainingProblem> chunks;
    for (int start = first;; start += length - overlap) {
        const int stop = start + length;  // exclusive
        Sequence window;
        for (const auto& d : seq.detections)
            if (d.frame >= start && d.frame < stop) window.detections.push_back(d);
        for (const auto& gt : seq.gts)
            if (gt.frame >= start && gt.frame < stop) window.gts.push_back(gt);
        chunks.push_back(make_training_problem(window, params));
        if (stop > last) break;
    }
    return chunks;
}

// ---------------------------------------------------------------------------
// Inference

CostedGraph loss_augmented_costs(const CostedGraph& cg, const LossVector& loss, const FlowSolution& gt) {
    CostedGraph aug = cg;
    auto shift = [](Eigen::VectorXd& c, const Eigen::VectorXd& l, const Eigen::VectorXd& truth) {
        for (Eigen::Index k = 0; k < c.size(); ++k) c[k] += truth[k] > 0.5 ? l[k] : -l[k];
    };
    shift(aug.c_det, loss.det, gt.det);
    shift(aug.c_birth, loss.birth, gt.birth);
    shift(aug.c_death, loss.death, gt.death);
    shift(aug.c_trans, loss.trans, gt.trans);
    return aug;
}

FlowSolution infer(const CostedGraph& cg, InferenceMethod method) {
    switch (method) {
        case InferenceMethod::kGreedyDp: return greedy_dp_quadratic(cg);
        case InferenceMethod::kTwopassDp: return twopass_dp_quadratic(cg);
        case InferenceMethod::kLp: return solve_quadratic(cg, QuadraticMethod::kLpRound).flow;
        case InferenceMethod::kOracle: return brute_force_optimum(cg).best_flow;
    }
    throw InputError("unknown inference method");
}

AugmentedResult loss_augmented_infer(const CostedGraph& cg, const LossVector& loss, const FlowSolution& gt_flow,
                                     InferenceMethod method) {
    const CostedGraph aug = loss_augmented_costs(cg, loss, gt_flow);
    AugmentedResult r;
    r.fhat = method == InferenceMethod::kLp ? lp_relax_solve(aug).flow : infer(aug, method);
    r.loss = loss.hamming(gt_flow, r.fhat);
    r.violation = r.loss + flow_cost(cg, gt_flow) - flow_cost(cg, r.fhat);
    return r;
}

// ---------------------------------------------------------------------------
// Cutting plane

TrainingResult cutting_plane_train(const std::vector<TrainingProblem>& problems, const TrainingOptions& options) {
    if (problems.empty()) throw InputError("no training problems");
    const WeightLayout layout = problems.front().gt_features.layout();
    TrainingResult result;
    result.weights = WeightVector(layout);
    std::vector<ConstraintRow> rows;
    Eigen::VectorXd alpha;
    double xi = 0.0, master_objective = 0.0;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        ConstraintRow row{FeatureVector(layout), 0.0};
        for (const auto& p : problems) {
            const CostedGraph cg = assign_costs(p.graph, result.weights);
            const auto r = loss_augmented_infer(cg, p.loss, p.gt_flow, options.method);
            row.delta_psi += p.gt_features - features_of_flow(*p.graph, r.fhat);
            row.loss_value += r.loss;
        }
        IterationRecord rec;
        rec.violation = row.loss_value - result.weights.values().dot(row.delta_psi.values());
        if (rec.violation <= xi + options.eps) {
            rec.xi = xi;
            rec.master_objective = master_objective;
            result.history.push_back(rec);
            result.converged = true;
            break;
        }
        rows.push_back(std::move(row));
        const auto qp = solve_master_qp(rows, options.C, layout, alpha);
        result.weights = qp.w;
        alpha = qp.alpha;
        xi = qp.xi;
        master_objective = qp.objective;

        rec.added = true;
        rec.duality_gap = qp.objective - qp.dual_objective;
        rec.xi = xi;
        rec.master_objective = master_objective;
        rec.max_constraint_residual = -std::numeric_limits<double>::infinity();
        for (const auto& r : rows)
            rec.max_constraint_residual =
                std::max(rec.max_constraint_residual, r.loss_value - qp.w.values().dot(r.delta_psi.values()) - xi);
        result.history.push_back(rec);
    }
    return result;
}

}  // namespace qflow
