#pragma once

#include "qflow/graph.hpp"

#include <Eigen/Dense>

#include <memory>

namespace qflow {

/// Block layout shared by weight and feature vectors:
/// [birth(1), death(1), appearance(2), transition(2 * max_gap), pairwise(D * K^2)].
struct WeightLayout {
    int num_classes = 1;
    int relation_dim = kRelationDim;
    int max_gap = 8;

    static WeightLayout of(const TrackingGraph& g) { return {g.num_classes(), g.relation_dim(), g.max_gap()}; }

    Eigen::Index birth() const { return 0; }
    Eigen::Index death() const { return 1; }
    Eigen::Index appearance() const { return 2; }
    Eigen::Index transition() const { return 4; }
    Eigen::Index transition_size() const { return 2 * max_gap; }
    Eigen::Index pairwise() const { return transition() + transition_size(); }
    Eigen::Index pairwise_size() const { return Eigen::Index(relation_dim) * num_classes * num_classes; }
    /// Offset of block (class_i, class_j) inside the full vector.
    Eigen::Index pairwise_block(int class_i, int class_j) const {
        return pairwise() + (Eigen::Index(class_i) * num_classes + class_j) * relation_dim;
    }
    Eigen::Index size() const { return pairwise() + pairwise_size(); }

    friend bool operator==(const WeightLayout&, const WeightLayout&) = default;
};

/// Dense vector with the WeightLayout block structure. The tag keeps weights and
/// features from being mixed up; dot() is the only bridge between them.
template <typename Tag>
class BlockVector {
public:
    BlockVector() = default;
    explicit BlockVector(const WeightLayout& layout) : layout_(layout), values_(Eigen::VectorXd::Zero(layout.size())) {}
    BlockVector(const WeightLayout& layout, Eigen::VectorXd values) : layout_(layout), values_(std::move(values)) {}

    const WeightLayout& layout() const { return layout_; }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::VectorXd& values() { return values_; }
    Eigen::Index size() const { return values_.size(); }

    double& birth() { return values_[layout_.birth()]; }
    double birth() const { return values_[layout_.birth()]; }
    double& death() { return values_[layout_.death()]; }
    double death() const { return values_[layout_.death()]; }
    auto appearance() { return values_.segment(layout_.appearance(), 2); }
    auto appearance() const { return values_.segment(layout_.appearance(), 2); }
    auto transition() { return values_.segment(layout_.transition(), layout_.transition_size()); }
    auto transition() const { return values_.segment(layout_.transition(), layout_.transition_size()); }
    auto pairwise() { return values_.segment(layout_.pairwise(), layout_.pairwise_size()); }
    auto pairwise() const { return values_.segment(layout_.pairwise(), layout_.pairwise_size()); }
    auto pairwise_block(int a, int b) { return values_.segment(layout_.pairwise_block(a, b), layout_.relation_dim); }
    auto pairwise_block(int a, int b) const { return values_.segment(layout_.pairwise_block(a, b), layout_.relation_dim); }

    BlockVector& operator+=(const BlockVector& o) { values_ += o.values_; return *this; }
    BlockVector& operator-=(const BlockVector& o) { values_ -= o.values_; return *this; }
    friend BlockVector operator+(BlockVector a, const BlockVector& b) { return a += b; }
    friend BlockVector operator-(BlockVector a, const BlockVector& b) { return a -= b; }
    friend BlockVector operator*(double s, BlockVector a) { a.values_ *= s; return a; }

private:
    WeightLayout layout_{};
    Eigen::VectorXd values_;
};

using WeightVector = BlockVector<struct WeightTag>;
using FeatureVector = BlockVector<struct FeatureTag>;

inline double dot(const WeightVector& w, const FeatureVector& psi) { return w.values().dot(psi.values()); }

/// Assignment of every flow variable. Values are 0/1 for integral flows and in [0, 1]
/// for relaxed ones. `pair` optionally carries the linearised products f_i f_j per
/// ordered pair; when empty the products are taken from `det`.
struct FlowSolution {
    Eigen::VectorXd det, birth, death, trans;
    Eigen::VectorXd pair;
    double objective = 0.0;

    static FlowSolution zero(const TrackingGraph& g);

    bool is_integral(double tol = 1e-6) const;
    /// Value of the product term for ordered pair p = (i, j).
    double pair_value(const TrackingGraph& g, int p) const;
    /// All variables concatenated (det, birth, death, trans); the lexicographic order key.
    Eigen::VectorXd stacked() const;
    int num_tracks() const { return static_cast<int>(birth.sum() + 0.5); }
};

/// Throws InputError unless every conservation constraint holds to `tol` and values lie in [0, 1].
void check_feasible(const TrackingGraph& g, const FlowSolution& f, double tol = 1e-7);
bool is_feasible(const TrackingGraph& g, const FlowSolution& f, double tol = 1e-7);

/// Graph with per-element costs for the quadratic objective.
struct CostedGraph {
    std::shared_ptr<const TrackingGraph> graph;
    Eigen::VectorXd c_det, c_trans, c_birth, c_death;
    /// One entry per ordered pair.
    Eigen::VectorXd q;

    static CostedGraph zeros(std::shared_ptr<const TrackingGraph> g);
    const TrackingGraph& g() const { return *graph; }
    bool has_interactions() const { return q.size() > 0 && q.cwiseAbs().maxCoeff() > 0.0; }
};

// Element features.
Eigen::VectorXd transition_feature(const TransitionEdge& edge, int max_gap = 8);
Eigen::Vector2d appearance_feature(const Detection& det);
/// Sparse in spirit: the relation written into block (class_i, class_j), zero elsewhere.
FeatureVector pairwise_feature(const PairwisePair& pair, int class_i, int class_j, const WeightLayout& layout);

/// Block sums of element features over the active variables of f.
FeatureVector features_of_flow(const TrackingGraph& g, const FlowSolution& f);

/// Costs minimised by every solver: C(f) = -w^T Psi(f).
CostedGraph assign_costs(std::shared_ptr<const TrackingGraph> g, const WeightVector& w);

/// Linear part of the objective (q ignored).
double linear_cost(const CostedGraph& cg, const FlowSolution& f);
/// Full quadratic objective, summing q over ordered pairs. Throws InputError on infeasible f.
double flow_cost(const CostedGraph& cg, const FlowSolution& f);

}  // namespace qflow
