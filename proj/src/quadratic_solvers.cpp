#include "qflow/quadratic_solvers.hpp"

#include "qflow/errors.hpp"
#include "qflow/flow_solvers.hpp"
#include "residual_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qflow {

namespace {

// q_ij + q_ji for pair p = (i, j).
double combined_weight(const CostedGraph& cg, int p) { return cg.q[p] + cg.q[cg.g().reverse_pair(p)]; }

void add_partner_costs(const CostedGraph& cg, int i, double sign, std::vector<double>& unary) {
    for (int p : cg.g().pairs_from(i)) unary[cg.g().pairs()[p].j] += sign * combined_weight(cg, p);
}

}  // namespace

// ---------------------------------------------------------------------------
// Greedy DP with pairwise cost updates

FlowSolution greedy_dp_quadratic(const CostedGraph& cg) {
    const auto& g = cg.g();
    const int n = g.num_nodes();
    std::vector<double> unary(cg.c_det.data(), cg.c_det.data() + n);
    std::vector<double> cost(n);
    std::vector<int> link(n);
    std::vector<char> removed(n, 0);
    FlowSolution f = FlowSolution::zero(g);

    for (int iter = 0; iter < n; ++iter) {
        int end = -1;
        double best = 0.0;
        for (int i = 0; i < n; ++i) {
            cost[i] = detail::kInfinity;
            link[i] = -1;
            if (removed[i]) continue;
            double in = cg.c_birth[i];
            for (int e : g.in_edges(i)) {
                const int j = g.edges()[e].src;
                if (removed[j]) continue;
                const double v = cost[j] + cg.c_trans[e];
                if (v < in) {
                    in = v;
                    link[i] = e;
                }
            }
            cost[i] = unary[i] + in;
            const double v = cost[i] + cg.c_death[i];
            if (v < best) {
                best = v;
                end = i;
            }
        }
        if (end < 0) break;

        f.death[end] = 1.0;
        for (int i = end;;) {
            f.det[i] = 1.0;
            removed[i] = 1;
            add_partner_costs(cg, i, 1.0, unary);
            const int e = link[i];
            if (e < 0) {
                f.birth[i] = 1.0;
                break;
            }
            f.trans[e] = 1.0;
            i = g.edges()[e].src;
        }
    }
    f.objective = flow_cost(cg, f);
    return f;
}

// ---------------------------------------------------------------------------
// Two-pass DP with pairwise cost updates

FlowSolution twopass_dp_quadratic(const CostedGraph& cg) {
    const auto& g = cg.g();
    detail::ResidualGraph state(g);
    std::vector<double> unary(cg.c_det.data(), cg.c_det.data() + cg.c_det.size());
    // Interactions can make the residual path cost inexact; the cap guarantees termination.
    const int max_iterations = 2 * g.num_nodes() + 1;
    for (int iter = 0; iter < max_iterations; ++iter) {
        const auto path = detail::twopass_iteration(cg, unary, state);
        if (!path.found()) break;
        for (int i : path.turned_on) add_partner_costs(cg, i, 1.0, unary);
        for (int i : path.turned_off) add_partner_costs(cg, i, -1.0, unary);
    }
    FlowSolution f = state.to_flow();
    f.objective = flow_cost(cg, f);
    return f;
}

// ---------------------------------------------------------------------------
// LP relaxation

namespace {

struct UnionFind {
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
    std::vector<int> parent;
};

}  // namespace

LpSolution lp_relax_solve(const CostedGraph& cg, const SimplexOptions& options) {
    const auto& g = cg.g();
    const int n = g.num_nodes();

    // Unordered pairs carrying a nonzero combined weight, keyed by their (i < j) pair index.
    std::vector<int> coupled;
    for (int p = 0; p < g.num_pairs(); ++p)
        if (g.pairs()[p].i < g.pairs()[p].j && combined_weight(cg, p) != 0.0) coupled.push_back(p);

    UnionFind uf(n);
    for (const auto& e : g.edges()) uf.unite(e.src, e.dst);
    for (int p : coupled) uf.unite(g.pairs()[p].i, g.pairs()[p].j);

    std::vector<std::vector<int>> comp_nodes(n), comp_edges(n), comp_pairs(n);
    for (int i = 0; i < n; ++i) comp_nodes[uf.find(i)].push_back(i);
    for (int e = 0; e < g.num_edges(); ++e) comp_edges[uf.find(g.edges()[e].src)].push_back(e);
    for (int p : coupled) comp_pairs[uf.find(g.pairs()[p].i)].push_back(p);

    LpSolution result;
    result.flow = FlowSolution::zero(g);
    Eigen::VectorXd u_value = Eigen::VectorXd::Constant(g.num_pairs(), std::numeric_limits<double>::quiet_NaN());

    std::vector<int> det_var(n), birth_var(n), death_var(n), trans_var(g.num_edges());
    for (int root = 0; root < n; ++root) {
        const auto& nodes = comp_nodes[root];
        if (nodes.empty()) continue;
        LinearProgram lp;
        for (int i : nodes) {
            det_var[i] = lp.add_var(cg.c_det[i], 0.0, 1.0);
            birth_var[i] = lp.add_var(cg.c_birth[i], 0.0, 1.0);
            death_var[i] = lp.add_var(cg.c_death[i], 0.0, 1.0);
        }
        for (int e : comp_edges[root]) trans_var[e] = lp.add_var(cg.c_trans[e], 0.0, 1.0);
        for (int i : nodes) {
            std::vector<std::pair<int, double>> in{{birth_var[i], 1.0}, {det_var[i], -1.0}};
            for (int e : g.in_edges(i)) in.push_back({trans_var[e], 1.0});
            lp.add_row(std::move(in), RowSense::kEqual, 0.0);
            std::vector<std::pair<int, double>> out{{death_var[i], 1.0}, {det_var[i], -1.0}};
            for (int e : g.out_edges(i)) out.push_back({trans_var[e], 1.0});
            lp.add_row(std::move(out), RowSense::kEqual, 0.0);
        }
        std::vector<int> u_var;
        for (int p : comp_pairs[root]) {
            const double w = combined_weight(cg, p);
            const int u = lp.add_var(w, 0.0, 1.0);
            u_var.push_back(u);
            const int fi = det_var[g.pairs()[p].i], fj = det_var[g.pairs()[p].j];
            if (w > 0.0) {
                lp.add_row({{fi, 1.0}, {fj, 1.0}, {u, -1.0}}, RowSense::kLessEqual, 1.0);
            } else {
                lp.add_row({{u, 1.0}, {fi, -1.0}}, RowSense::kLessEqual, 0.0);
                lp.add_row({{u, 1.0}, {fj, -1.0}}, RowSense::kLessEqual, 0.0);
            }
        }

        const SimplexResult sr = simplex_solve(lp, options);
        if (sr.status == SimplexStatus::kInfeasible || sr.status == SimplexStatus::kUnbounded)
            throw SolverError("flow relaxation reported infeasible or unbounded");
        result.iterations += sr.iterations;
        result.hit_limit = result.hit_limit || sr.status == SimplexStatus::kIterationLimit;
        result.objective += sr.objective;
        result.objective_trace.insert(result.objective_trace.end(), sr.objective_trace.begin(), sr.objective_trace.end());

        auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
        for (int i : nodes) {
            result.flow.det[i] = clamp01(sr.x[det_var[i]]);
            result.flow.birth[i] = clamp01(sr.x[birth_var[i]]);
            result.flow.death[i] = clamp01(sr.x[death_var[i]]);
        }
        for (int e : comp_edges[root]) result.flow.trans[e] = clamp01(sr.x[trans_var[e]]);
        for (size_t k = 0; k < u_var.size(); ++k) {
            const int p = comp_pairs[root][k];
            u_value[p] = u_value[g.reverse_pair(p)] = clamp01(sr.x[u_var[k]]);
        }
    }

    result.flow.pair.resize(g.num_pairs());
    for (int p = 0; p < g.num_pairs(); ++p) {
        const auto& pr = g.pairs()[p];
        result.flow.pair[p] = std::isnan(u_value[p]) ? result.flow.det[pr.i] * result.flow.det[pr.j] : u_value[p];
    }
    result.flow.objective = result.objective;
    result.integral = result.flow.is_integral(1e-6);
    return result;
}

FlowSolution round_euclidean(const CostedGraph& cg, const LpSolution& lp) {
    CostedGraph proj = CostedGraph::zeros(cg.graph);
    const auto& f = lp.flow;
    proj.c_det = Eigen::VectorXd::Ones(f.det.size()) - 2.0 * f.det;
    proj.c_birth = Eigen::VectorXd::Ones(f.birth.size()) - 2.0 * f.birth;
    proj.c_death = Eigen::VectorXd::Ones(f.death.size()) - 2.0 * f.death;
    proj.c_trans = Eigen::VectorXd::Ones(f.trans.size()) - 2.0 * f.trans;
    FlowSolution out = ssp_solve(proj);
    out.objective = flow_cost(cg, out);
    return out;
}

FlowSolution round_underestimator(const CostedGraph& cg, const LpSolution& lp) {
    const auto& g = cg.g();
    CostedGraph lin = cg;
    for (int p = 0; p < g.num_pairs(); ++p) {
        const double u = lp.flow.pair.size() > 0 ? lp.flow.pair[p] : 0.0;
        // q_ij u_ij enters c_i and, through the reverse ordering, c_j.
        lin.c_det[g.pairs()[p].i] += cg.q[p] * u;
        lin.c_det[g.pairs()[p].j] += cg.q[p] * u;
    }
    FlowSolution out = ssp_solve(lin);
    out.objective = flow_cost(cg, out);
    return out;
}

QuadraticResult solve_quadratic(const CostedGraph& cg, QuadraticMethod method) {
    QuadraticResult r;
    switch (method) {
        case QuadraticMethod::kGreedyDp: r.flow = greedy_dp_quadratic(cg); break;
        case QuadraticMethod::kTwopassDp: r.flow = twopass_dp_quadratic(cg); break;
        case QuadraticMethod::kLpRound: {
            const LpSolution lp = lp_relax_solve(cg);
            FlowSolution a = round_euclidean(cg, lp);
            FlowSolution b = round_underestimator(cg, lp);
            r.flow = b.objective < a.objective ? std::move(b) : std::move(a);
            r.lower_bound = lp.objective;
            break;
        }
    }
    r.final_cost = r.flow.objective;
    return r;
}

double relative_gap(double final_cost, double lower_bound) {
    if (final_cost == lower_bound) return 0.0;
    if (lower_bound == 0.0) return std::numeric_limits<double>::infinity();
    return (final_cost - lower_bound) / std::abs(lower_bound);
}

}  // namespace qflow
