#pragma once

#include "qflow/labels.hpp"
#include "qflow/master_qp.hpp"
#include "qflow/potentials.hpp"

#include <memory>
#include <vector>

namespace qflow {

/// Raw training video: detections and labels.
struct Sequence {
    std::vector<Detection> detections;
    std::vector<GroundTruthBox> gts;
};

inline constexpr double kTruthIou = 0.5;

struct GroundTruthMapping {
    FlowSolution flow;
    /// GT track id claimed by each detection, -1 for false detections.
    std::vector<int> track_of;
};

/// Each non-ambiguous GT box claims the highest-scoring unclaimed same-class detection of its
/// frame with IoU >= 0.5. Claimed detections of one GT track are then covered by repeatedly
/// extracting the path through graph edges that claims the most of them.
GroundTruthMapping map_ground_truth(const TrackingGraph& g, const std::vector<GroundTruthBox>& gts);

enum class TransitionType { kNN, kPN, kNP, kPPPlus, kPPMinus };

struct TransitionClass {
    TransitionType type = TransitionType::kNN;
    int true_virtual = 0;
    int false_virtual = 0;
};

/// Endpoint truth plus the labels of the gap - 1 interpolated boxes spanned by the edge.
TransitionClass classify_transition(const TrackingGraph& g, int edge, const std::vector<int>& track_of,
                                    const std::vector<GroundTruthBox>& gts);

/// Per-variable loss weights.
struct LossVector {
    Eigen::VectorXd det, birth, death, trans;

    /// sum loss_v |f_v - fhat_v| over detection, birth, death and transition variables.
    double hamming(const FlowSolution& f, const FlowSolution& fhat) const;
};

double transition_loss(const TransitionClass& c);
LossVector loss_vector(const TrackingGraph& g, const std::vector<int>& track_of, const std::vector<GroundTruthBox>& gts);

struct TrainingProblem {
    std::shared_ptr<const TrackingGraph> graph;
    FlowSolution gt_flow;
    FeatureVector gt_features;
    LossVector loss;
};

/// Builds the graph (after dropping detections on ambiguous labels), the GT flow and the loss.
TrainingProblem make_training_problem(const Sequence& seq, const GraphParams& params);

/// Windows of `length` frames stepping by length - overlap, the last one reaching the final frame.
std::vector<TrainingProblem> chunk_sequences(const Sequence& seq, int length, int overlap, const GraphParams& params);

enum class InferenceMethod {
    kGreedyDp,
    kTwopassDp,
    /// Relaxed LP; the maximiser may be fractional.
    kLp,
    /// Exhaustive search, small graphs only.
    kOracle,
};

struct AugmentedResult {
    FlowSolution fhat;
    double loss = 0.0;
    /// L(f_gt, fhat) - <w, Psi(f_gt) - Psi(fhat)>.
    double violation = 0.0;
};

/// Costs shifted by -loss on GT-off variables and +loss on GT-on variables, so minimising
/// the shifted objective maximises loss minus cost.
CostedGraph loss_augmented_costs(const CostedGraph& cg, const LossVector& loss, const FlowSolution& gt_flow);

AugmentedResult loss_augmented_infer(const CostedGraph& cg, const LossVector& loss, const FlowSolution& gt_flow,
                                     InferenceMethod method);

/// Integral prediction with the chosen method (kLp rounds the relaxation).
FlowSolution infer(const CostedGraph& cg, InferenceMethod method);

struct TrainingOptions {
    double C = 1.0 / 128.0;
    double eps = 1e-4;
    int max_iterations = 100;
    InferenceMethod method = InferenceMethod::kGreedyDp;
};

struct IterationRecord {
    /// Violation of the aggregated most-violated constraint under the current weights.
    double violation = 0.0;
    double xi = 0.0;
    double master_objective = 0.0;
    /// max_r (loss_r - <w, delta_psi_r>) - xi over all stored rows after the master solve.
    double max_constraint_residual = 0.0;
    /// Primal minus dual objective of the master solve; zero at the exact optimum.
    double duality_gap = 0.0;
    bool added = false;
};

struct TrainingResult {
    WeightVector weights;
    std::vector<IterationRecord> history;
    bool converged = false;
    int iterations() const { return static_cast<int>(history.size()); }
};

/// 1-slack cutting-plane structured SVM starting from w = 0.
TrainingResult cutting_plane_train(const std::vector<TrainingProblem>& problems, const TrainingOptions& options);

}  // namespace qflow
