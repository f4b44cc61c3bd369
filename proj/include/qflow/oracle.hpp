#pragma once

#include "qflow/potentials.hpp"

#include <cstdint>
#include <functional>

namespace qflow {

inline constexpr int kOracleMaxNodes = 14;

struct OracleResult {
    FlowSolution best_flow;
    double best_cost = 0.0;
    std::int64_t num_feasible = 0;
};

/// Calls `visit` once for every integral flow satisfying conservation. Each detection is
/// either unused, a track start, or the continuation of an earlier active detection whose
/// successor slot is still free. Throws InputError above kOracleMaxNodes detections.
void enumerate_flows(const TrackingGraph& g, const std::function<void(const FlowSolution&)>& visit);

/// Exact minimiser of the quadratic objective by exhaustive enumeration. Ties go to the
/// lexicographically smallest stacked flow vector.
OracleResult brute_force_optimum(const CostedGraph& cg);

}  // namespace qflow
