#include "qflow/errors.hpp"
#include "qflow/flow_solvers.hpp"
#include "qflow/oracle.hpp"
#include "qflow/quadratic_solvers.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qflow;
using qflow::testing::det_at;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Two detections in one frame, each worth `each` alone, with q_ij + q_ji = `combined`.
CostedGraph pair_instance(double each, double combined) {
    const std::vector<Detection> dets = {det_at(0, 0, 0.0), det_at(1, 0, 100.0)};
    std::vector<PairwisePair> pairs = {{0, 1, spatial_relation(dets[0].box, dets[1].box)},
                                       {1, 0, spatial_relation(dets[1].box, dets[0].box)}};
    auto g = std::make_shared<const TrackingGraph>(dets, std::vector<TransitionEdge>{}, pairs, 1);
    CostedGraph cg = CostedGraph::zeros(g);
    cg.c_det.setConstant(each);
    cg.q[0] = combined / 2.0;
    cg.q[1] = combined / 2.0;
    return cg;
}

}  // namespace

TEST(Simplex, TwoVariableOptimum) {
    // min -x - y  s.t.  x + 2y <= 4, 3x + y <= 6  ->  (1.6, 1.2)
    LinearProgram lp;
    const int x = lp.add_var(-1.0), y = lp.add_var(-1.0);
    lp.add_row({{x, 1.0}, {y, 2.0}}, RowSense::kLessEqual, 4.0);
    lp.add_row({{x, 3.0}, {y, 1.0}}, RowSense::kLessEqual, 6.0);
    const auto r = simplex_solve(lp);
    ASSERT_EQ(r.status, SimplexStatus::kOptimal);
    EXPECT_NEAR(r.x[x], 1.6, 1e-12);
    EXPECT_NEAR(r.x[y], 1.2, 1e-12);
    EXPECT_NEAR(r.objective, -2.8, 1e-12);
}

TEST(Simplex, EqualityRowsAndUpperBounds) {
    // min x - 2y + z  s.t.  x + y + z = 2, y - z <= 0.5, 0 <= y <= 1  ->  y = 1, z = 0.5, x = 0.5
    LinearProgram lp;
    const int x = lp.add_var(1.0), y = lp.add_var(-2.0, 0.0, 1.0), z = lp.add_var(1.0);
    lp.add_row({{x, 1.0}, {y, 1.0}, {z, 1.0}}, RowSense::kEqual, 2.0);
    lp.add_row({{y, 1.0}, {z, -1.0}}, RowSense::kLessEqual, 0.5);
    const auto r = simplex_solve(lp);
    ASSERT_EQ(r.status, SimplexStatus::kOptimal);
    EXPECT_NEAR(r.objective, 0.5 - 2.0 + 0.5, 1e-12);
    EXPECT_NEAR(r.x[y], 1.0, 1e-12);
    EXPECT_LE(max_violation(lp, r.x), 1e-9);
}

TEST(Simplex, NegativeRightHandSideNeedsPhaseOne) {
    // min x  s.t.  -x <= -3  ->  x = 3
    LinearProgram lp;
    const int x = lp.add_var(1.0);
    lp.add_row({{x, -1.0}}, RowSense::kLessEqual, -3.0);
    const auto r = simplex_solve(lp);
    ASSERT_EQ(r.status, SimplexStatus::kOptimal);
    EXPECT_NEAR(r.x[x], 3.0, 1e-12);
}

TEST(Simplex, DetectsInfeasibleAndUnbounded) {
    LinearProgram bad;
    const int x = bad.add_var(1.0, 0.0, 1.0);
    bad.add_row({{x, 1.0}}, RowSense::kEqual, 2.0);
    EXPECT_EQ(simplex_solve(bad).status, SimplexStatus::kInfeasible);

    LinearProgram open;
    const int a = open.add_var(-1.0), b = open.add_var(0.0);
    open.add_row({{a, 1.0}, {b, -1.0}}, RowSense::kLessEqual, 1.0);
    EXPECT_EQ(simplex_solve(open).status, SimplexStatus::kUnbounded);
}

TEST(Simplex, PricingRulesAgreeOnRandomPackingLps) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 40; ++k) {
        LinearProgram lp;
        const int n = 3 + k % 6, m = 2 + k % 5;
        for (int j = 0; j < n; ++j) lp.add_var(-u(rng), 0.0, k % 2 ? 1.0 : kInf);
        for (int r = 0; r < m; ++r) {
            std::vector<std::pair<int, double>> terms;
            for (int j = 0; j < n; ++j) terms.push_back({j, 0.1 + u(rng)});
            lp.add_row(terms, RowSense::kLessEqual, 1.0 + u(rng));
        }
        SimplexOptions bland;
        bland.always_bland = true;
        SimplexOptions tight;
        tight.refactor_every = 1;
        const auto a = simplex_solve(lp), b = simplex_solve(lp, bland), c = simplex_solve(lp, tight);
        ASSERT_EQ(a.status, SimplexStatus::kOptimal);
        ASSERT_EQ(b.status, SimplexStatus::kOptimal);
        EXPECT_NEAR(a.objective, b.objective, 1e-9);
        EXPECT_NEAR(a.objective, c.objective, 1e-9);
        EXPECT_LE(max_violation(lp, a.x), 1e-9);
    }
}

TEST(Simplex, PhaseTwoObjectiveNeverIncreases) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SimplexOptions opt;
    opt.record_objective = true;
    for (int k = 0; k < 20; ++k) {
        LinearProgram lp;
        for (int j = 0; j < 12; ++j) lp.add_var(u(rng) - 0.7, 0.0, 1.0);
        for (int r = 0; r < 8; ++r) {
            std::vector<std::pair<int, double>> terms;
            for (int j = 0; j < 12; ++j)
                if (u(rng) < 0.5) terms.push_back({j, u(rng) < 0.3 ? -1.0 : 1.0});
            lp.add_row(terms, r % 3 ? RowSense::kLessEqual : RowSense::kEqual, r % 3 ? 1.5 : 0.0);
        }
        const auto r = simplex_solve(lp, opt);
        if (r.status != SimplexStatus::kOptimal) continue;
        for (size_t i = 1; i < r.objective_trace.size(); ++i) EXPECT_LE(r.objective_trace[i], r.objective_trace[i - 1] + 1e-9);
        if (!r.objective_trace.empty()) EXPECT_NEAR(r.objective_trace.back(), r.objective, 1e-7);
    }
}

TEST(QuadraticSolvers, RepulsionKeepsOneOfTwo) {
    const CostedGraph cg = pair_instance(-1.0, 3.0);
    for (const FlowSolution& f : {greedy_dp_quadratic(cg), twopass_dp_quadratic(cg), solve_quadratic(cg, QuadraticMethod::kLpRound).flow})
        EXPECT_DOUBLE_EQ(flow_cost(cg, f), -1.0);
    // the linear solver ignores q and pays for both
    EXPECT_DOUBLE_EQ(flow_cost(cg, ssp_solve(cg)), 1.0);
    const LpSolution lp = lp_relax_solve(cg);
    EXPECT_NEAR(lp.objective, -1.0, 1e-12);
}

TEST(QuadraticSolvers, AttractionActivatesBoth) {
    const CostedGraph cg = pair_instance(1.0, -3.0);
    EXPECT_DOUBLE_EQ(brute_force_optimum(cg).best_cost, -1.0);
    const LpSolution lp = lp_relax_solve(cg);
    EXPECT_NEAR(lp.objective, -1.0, 1e-12);
    EXPECT_TRUE(lp.integral);
    EXPECT_DOUBLE_EQ(flow_cost(cg, solve_quadratic(cg, QuadraticMethod::kLpRound).flow), -1.0);
    // greedy never starts a positive-cost path, so it cannot discover the pair
    EXPECT_DOUBLE_EQ(flow_cost(cg, greedy_dp_quadratic(cg)), 0.0);
}

TEST(QuadraticSolvers, LpLinearisationHoldsProducts) {
    std::mt19937_64 rng(33);
    qflow::testing::InstanceSpec spec;
    spec.max_nodes = 10;
    spec.max_frames = 3;
    spec.pair_prob = 0.8;
    for (int k = 0; k < 40; ++k) {
        const CostedGraph cg = qflow::testing::random_instance(rng, spec);
        const LpSolution lp = lp_relax_solve(cg);
        const auto& g = cg.g();
        ASSERT_EQ(lp.flow.pair.size(), g.num_pairs());
        EXPECT_TRUE(is_feasible(g, lp.flow, 1e-7));
        for (int p = 0; p < g.num_pairs(); ++p) {
            const auto& pr = g.pairs()[p];
            const double u = lp.flow.pair[p], fi = lp.flow.det[pr.i], fj = lp.flow.det[pr.j];
            EXPECT_GE(u, std::max(0.0, fi + fj - 1.0) - 1e-7);
            EXPECT_LE(u, std::min(fi, fj) + 1e-7);
            EXPECT_NEAR(u, lp.flow.pair[g.reverse_pair(p)], 1e-12);
        }
        // the relaxed objective is the cost of the relaxed point
        EXPECT_NEAR(lp.objective, flow_cost(cg, lp.flow), 1e-7);
        if (lp.integral) EXPECT_NEAR(lp.objective, brute_force_optimum(cg).best_cost, 1e-7);
    }
}

TEST(QuadraticSolvers, SandwichOnRandomInstances) {
    std::mt19937_64 rng(34);
    qflow::testing::InstanceSpec spec;
    spec.max_nodes = 8;
    spec.max_frames = 3;
    spec.pair_prob = 0.7;
    for (int k = 0; k < 60; ++k) {
        const CostedGraph cg = qflow::testing::random_instance(rng, spec);
        const double opt = brute_force_optimum(cg).best_cost;
        const LpSolution lp = lp_relax_solve(cg);
        EXPECT_LE(lp.objective, opt + 1e-7);
        for (const FlowSolution& f : {greedy_dp_quadratic(cg), twopass_dp_quadratic(cg), round_euclidean(cg, lp),
                                      round_underestimator(cg, lp)}) {
            EXPECT_TRUE(f.is_integral());
            EXPECT_GE(flow_cost(cg, f), opt - 1e-7);
        }
    }
}

TEST(QuadraticSolvers, RoundingsReturnIntegralPointOfIntegralLp) {
    std::mt19937_64 rng(35);
    qflow::testing::InstanceSpec spec;
    spec.max_nodes = 12;
    for (int k = 0; k < 20; ++k) {
        const CostedGraph cg = qflow::testing::random_instance(rng, spec);
        const LpSolution lp = lp_relax_solve(cg);
        ASSERT_TRUE(lp.integral);
        EXPECT_NEAR(flow_cost(cg, round_euclidean(cg, lp)), lp.objective, 1e-9);
        EXPECT_NEAR(flow_cost(cg, round_underestimator(cg, lp)), lp.objective, 1e-9);
    }
}

TEST(QuadraticSolvers, UnderestimatorWithoutInteractionsIsLinearSolve) {
    std::mt19937_64 rng(36);
    qflow::testing::InstanceSpec spec;
    spec.max_nodes = 15;
    for (int k = 0; k < 20; ++k) {
        const CostedGraph cg = qflow::testing::random_instance(rng, spec);
        LpSolution zero;
        zero.flow = FlowSolution::zero(cg.g());
        EXPECT_EQ(round_underestimator(cg, zero).stacked(), ssp_solve(cg).stacked());
        EXPECT_EQ(round_underestimator(cg, lp_relax_solve(cg)).stacked(), ssp_solve(cg).stacked());
    }
}

TEST(QuadraticSolvers, RelativeGap) {
    EXPECT_EQ(relative_gap(0.0, 0.0), 0.0);
    EXPECT_EQ(relative_gap(-5.0, -5.0), 0.0);
    EXPECT_DOUBLE_EQ(relative_gap(-9.0, -10.0), 0.1);
    EXPECT_DOUBLE_EQ(relative_gap(11.0, 10.0), 0.1);
    EXPECT_TRUE(std::isinf(relative_gap(1.0, 0.0)));
}
