#pragma once

#include "qflow/geometry.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace qflow {

/// A candidate site: one detector box at a frame.
struct Detection {
    int id = 0;
    int frame = 0;
    int class_id = 0;
    Box box;
    double score = 0.0;
    /// Per-frame center velocity used for link prediction; zero for raw detection files.
    Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
};

/// Transition between two detections. src/dst are node indices into TrackingGraph::detections.
struct TransitionEdge {
    int src = 0;
    int dst = 0;
    int gap = 1;
    double predicted_overlap = 0.0;
};

/// Ordered same-frame pair; relation describes j relative to i.
struct PairwisePair {
    int i = 0;
    int j = 0;
    Eigen::VectorXd relation;
};

struct GraphParams {
    int max_gap = 8;
    double link_threshold = 0.3;
    double score_threshold = -0.5;
    int num_classes = 1;

    /// Thresholds used for unlearned baselines.
    static GraphParams baseline() {
        GraphParams p;
        p.link_threshold = 0.5;
        p.score_threshold = 0.0;
        return p;
    }
};

/// Directed acyclic association graph. Detections are ordered by (frame, id), so node
/// index order is a topological order of the transition edges.
class TrackingGraph {
public:
    TrackingGraph() = default;

    /// Takes ownership of pre-built elements and validates them. Detections are re-sorted
    /// by (frame, id) only if `edges` and `pairs` are empty; otherwise they must already be sorted.
    TrackingGraph(std::vector<Detection> detections, std::vector<TransitionEdge> edges, std::vector<PairwisePair> pairs,
                  int num_classes, int max_gap = 8, int relation_dim = kRelationDim);

    const std::vector<Detection>& detections() const { return detections_; }
    const std::vector<TransitionEdge>& edges() const { return edges_; }
    const std::vector<PairwisePair>& pairs() const { return pairs_; }

    int num_nodes() const { return static_cast<int>(detections_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    int num_pairs() const { return static_cast<int>(pairs_.size()); }
    int num_classes() const { return num_classes_; }
    int relation_dim() const { return relation_dim_; }
    int max_gap() const { return max_gap_; }
    std::pair<int, int> frame_range() const { return frame_range_; }

    /// Edge indices entering / leaving a node, ascending by the other endpoint.
    std::span<const int> in_edges(int node) const { return in_edges_[node]; }
    std::span<const int> out_edges(int node) const { return out_edges_[node]; }
    /// Pair indices with `node` as first element.
    std::span<const int> pairs_from(int node) const { return pairs_from_[node]; }
    /// Pair index of (j, i) for pair index p = (i, j).
    int reverse_pair(int p) const { return reverse_pair_[p]; }

private:
    void index();

    std::vector<Detection> detections_;
    std::vector<TransitionEdge> edges_;
    std::vector<PairwisePair> pairs_;
    int num_classes_ = 1;
    int relation_dim_ = kRelationDim;
    int max_gap_ = 8;
    std::pair<int, int> frame_range_{0, -1};

    std::vector<std::vector<int>> in_edges_;
    std::vector<std::vector<int>> out_edges_;
    std::vector<std::vector<int>> pairs_from_;
    std::vector<int> reverse_pair_;
};

/// All links (i, j) with 1 <= gap <= max_gap, equal classes, and
/// iou(predict_box(i, gap), box(j)) > link_threshold. Detections must be sorted by frame.
std::vector<TransitionEdge> link_candidates(std::span<const Detection> detections, int max_gap, double link_threshold);

/// Drops detections below the score threshold, links the rest and adds all ordered same-frame pairs.
/// Throws InputError on duplicate ids or malformed boxes.
TrackingGraph build_graph(std::vector<Detection> detections, const GraphParams& params);

}  // namespace qflow
