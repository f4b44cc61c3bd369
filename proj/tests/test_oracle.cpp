#include "qflow/errors.hpp"
#include "qflow/oracle.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace qflow;
using qflow::testing::det_at;

namespace {

// Every 0/1 assignment of all variables, filtered by is_feasible.
std::vector<FlowSolution> all_binary_flows(const TrackingGraph& g) {
    const int n = g.num_nodes(), m = g.num_edges(), vars = 3 * n + m;
    std::vector<FlowSolution> out;
    for (long mask = 0; mask < (1L << vars); ++mask) {
        FlowSolution f = FlowSolution::zero(g);
        for (int v = 0; v < vars; ++v) {
            const double x = (mask >> v) & 1;
            if (v < n) f.det[v] = x;
            else if (v < 2 * n) f.birth[v - n] = x;
            else if (v < 3 * n) f.death[v - 2 * n] = x;
            else f.trans[v - 3 * n] = x;
        }
        if (is_feasible(g, f)) out.push_back(f);
    }
    return out;
}

}  // namespace

TEST(Oracle, CountsHandEnumeratedFlows) {
    const std::vector<Detection> dets = {det_at(0, 0, 0.0), det_at(1, 1, 0.0), det_at(2, 2, 0.0)};
    // chain 0-1-2 plus the skip edge 0-2: 1 empty + 3 singles + 6 for pairs + 5 for the triple
    const TrackingGraph g(dets, {{0, 1, 1, 0.0}, {0, 2, 2, 0.0}, {1, 2, 1, 0.0}}, {}, 1);
    std::int64_t count = 0;
    enumerate_flows(g, [&](const FlowSolution& f) {
        EXPECT_TRUE(is_feasible(g, f));
        ++count;
    });
    EXPECT_EQ(count, 15);
}

TEST(Oracle, EnumerationMatchesBinarySearchSpace) {
    std::mt19937_64 rng(11);
    qflow::testing::InstanceSpec spec;
    spec.max_nodes = 4;
    spec.max_frames = 3;
    for (int k = 0; k < 30; ++k) {
        const auto g = qflow::testing::random_graph(rng, spec);
        if (3 * g->num_nodes() + g->num_edges() > 18) continue;
        std::int64_t count = 0;
        enumerate_flows(*g, [&](const FlowSolution&) { ++count; });
        EXPECT_EQ(count, static_cast<std::int64_t>(all_binary_flows(*g).size()));
    }
}

TEST(Oracle, OptimumMatchesExhaustiveBinarySearch) {
    std::mt19937_64 rng(12);
    qflow::testing::InstanceSpec spec;
    spec.max_nodes = 4;
    spec.max_frames = 2;
    spec.pair_prob = 0.8;
    for (int k = 0; k < 30; ++k) {
        const CostedGraph cg = qflow::testing::random_instance(rng, spec);
        if (3 * cg.g().num_nodes() + cg.g().num_edges() > 18) continue;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& f : all_binary_flows(cg.g())) best = std::min(best, flow_cost(cg, f));
        const auto r = brute_force_optimum(cg);
        EXPECT_NEAR(r.best_cost, best, 1e-12);
        EXPECT_NEAR(flow_cost(cg, r.best_flow), r.best_cost, 1e-12);
    }
}

TEST(Oracle, TiesGoToLexicographicallySmallest) {
    // All-zero costs: the empty flow is optimal and lexicographically smallest.
    const std::vector<Detection> dets = {det_at(0, 0, 0.0), det_at(1, 1, 0.0)};
    auto g = std::make_shared<const TrackingGraph>(dets, std::vector<TransitionEdge>{{0, 1, 1, 0.0}}, std::vector<PairwisePair>{}, 1);
    const auto r = brute_force_optimum(CostedGraph::zeros(g));
    EXPECT_EQ(r.best_cost, 0.0);
    EXPECT_EQ(r.best_flow.stacked().sum(), 0.0);
    EXPECT_EQ(r.num_feasible, 5);
}

TEST(Oracle, RejectsLargeGraphs) {
    std::vector<Detection> dets;
    for (int i = 0; i <= kOracleMaxNodes; ++i) dets.push_back(det_at(i, i, 0.0));
    auto g = std::make_shared<const TrackingGraph>(dets, std::vector<TransitionEdge>{}, std::vector<PairwisePair>{}, 1);
    EXPECT_THROW(brute_force_optimum(CostedGraph::zeros(g)), InputError);
}
