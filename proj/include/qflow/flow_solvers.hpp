#pragma once

#include "qflow/potentials.hpp"

#include <vector>

namespace qflow {

/// Node indices of one track, increasing in frame.
using Track = std::vector<int>;

struct SspTrace {
    /// Cost of every accepted augmenting path, in order.
    std::vector<double> path_costs;
};

/// Successive shortest paths on the residual network. Exact for the linear objective;
/// q is ignored. The returned objective is the linear cost.
FlowSolution ssp_solve(const CostedGraph& cg, SspTrace* trace = nullptr);

/// Greedy shortest-path extraction with node removal, cost-to-go cached per birth node.
FlowSolution dp_onepass(const CostedGraph& cg);

/// Two passes of dynamic programming per iteration to approximate the residual shortest path.
FlowSolution dp_twopass(const CostedGraph& cg);

/// Decomposes an integral feasible flow into tracks ordered by (first frame, first id).
std::vector<Track> extract_tracks(const TrackingGraph& g, const FlowSolution& f);
/// Inverse of extract_tracks. Consecutive nodes must be joined by a graph edge.
FlowSolution encode_tracks(const TrackingGraph& g, const std::vector<Track>& tracks);

}  // namespace qflow
