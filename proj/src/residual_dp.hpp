#pragma once

// Internal machinery shared by the linear and quadratic DP solvers.

#include "qflow/potentials.hpp"

#include <limits>
#include <vector>

namespace qflow::detail {

/// Finite stand-in for +infinity on deleted nodes and unreachable labels.
inline constexpr double kInfinity = 1e12;

/// Integral flow state, i.e. the set of reversed arcs of the residual graph.
class ResidualGraph {
public:
    explicit ResidualGraph(const TrackingGraph& g);

    const TrackingGraph& graph() const { return *g_; }
    bool active(int i) const { return det_[i]; }
    bool birth(int i) const { return birth_[i]; }
    bool death(int i) const { return death_[i]; }
    bool trans(int e) const { return trans_[e]; }
    /// Active outgoing / incoming transition of node i, or -1.
    int succ_edge(int i) const { return succ_[i]; }
    int pred_edge(int i) const { return pred_[i]; }

    void set_det(int i, bool on) { det_[i] = on; }
    void set_birth(int i, bool on) { birth_[i] = on; }
    void set_death(int i, bool on) { death_[i] = on; }
    void set_trans(int e, bool on);

    FlowSolution to_flow() const;

private:
    const TrackingGraph* g_;
    std::vector<char> det_, birth_, death_, trans_;
    std::vector<int> succ_, pred_;
};

/// Outcome of one approximate residual shortest-path search.
struct ResidualPath {
    double cost = kInfinity;
    std::vector<int> turned_on;   // detections switched 0 -> 1
    std::vector<int> turned_off;  // detections switched 1 -> 0
    bool found() const { return cost < kInfinity / 2; }
};

/// One iteration of the two-pass DP: forward pass ignoring backward arcs, backward pass
/// over instanced nodes, cycle-checked forward pass over uninstanced nodes. `unary` holds
/// the current detection costs (positive sense, negated internally for instanced nodes).
/// If the best path cost is negative it is applied to `state`.
ResidualPath twopass_iteration(const CostedGraph& cg, const std::vector<double>& unary, ResidualGraph& state);

}  // namespace qflow::detail
