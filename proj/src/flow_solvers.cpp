#include "qflow/flow_solvers.hpp"

#include "qflow/errors.hpp"
#include "residual_dp.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <tuple>

namespace qflow {

// ---------------------------------------------------------------------------
// Successive shortest paths

namespace {

enum class VarKind : char { kNone, kBirth, kDet, kDeath, kTrans };

struct Arc {
    int to;
    int rev;
    double cost;
    int cap;
    VarKind kind;
    int index;
};

class FlowNetwork {
public:
    static constexpr int kSource = 0;
    static constexpr int kSink = 1;

    explicit FlowNetwork(const CostedGraph& cg) : adj_(2 + 2 * cg.g().num_nodes()) {
        const auto& g = cg.g();
        for (int i = 0; i < g.num_nodes(); ++i) {
            add_arc(kSource, in(i), cg.c_birth[i], VarKind::kBirth, i);
            add_arc(in(i), out(i), cg.c_det[i], VarKind::kDet, i);
            add_arc(out(i), kSink, cg.c_death[i], VarKind::kDeath, i);
        }
        for (int e = 0; e < g.num_edges(); ++e)
            add_arc(out(g.edges()[e].src), in(g.edges()[e].dst), cg.c_trans[e], VarKind::kTrans, e);
    }

    static int in(int i) { return 2 + 2 * i; }
    static int out(int i) { return 3 + 2 * i; }
    int size() const { return static_cast<int>(adj_.size()); }
    std::vector<Arc>& arcs(int v) { return adj_[v]; }
    Arc& reverse(const Arc& a) { return adj_[a.to][a.rev]; }

    // Shortest distances from the source over the original DAG. Node numbering
    // S, (u_0, v_0), (u_1, v_1), ..., T is a topological order.
    std::vector<double> dag_distances() {
        std::vector<double> dist(size(), detail::kInfinity);
        dist[kSource] = 0.0;
        std::vector<int> order;
        order.push_back(kSource);
        for (int v = 2; v < size(); ++v) order.push_back(v);
        order.push_back(kSink);
        for (int v : order) {
            if (dist[v] >= detail::kInfinity) continue;
            for (const auto& a : adj_[v])
                if (a.cap > 0) dist[a.to] = std::min(dist[a.to], dist[v] + a.cost);
        }
        return dist;
    }

private:
    void add_arc(int from, int to, double cost, VarKind kind, int index) {
        adj_[from].push_back({to, static_cast<int>(adj_[to].size()), cost, 1, kind, index});
        adj_[to].push_back({from, static_cast<int>(adj_[from].size()) - 1, -cost, 0, VarKind::kNone, -1});
    }

    std::vector<std::vector<Arc>> adj_;
};

}  // namespace

FlowSolution ssp_solve(const CostedGraph& cg, SspTrace* trace) {
    FlowNetwork net(cg);
    const int nv = net.size();
    std::vector<double> potential = net.dag_distances();
    for (double& h : potential)
        if (h >= detail::kInfinity) h = 0.0;

    using Entry = std::pair<double, int>;
    std::vector<double> dist(nv);
    std::vector<std::pair<int, int>> parent(nv);  // (node, arc index)
    std::vector<char> done(nv);

    const int max_paths = cg.g().num_nodes();
    for (int iter = 0; iter < max_paths; ++iter) {
        std::fill(dist.begin(), dist.end(), detail::kInfinity);
        std::fill(done.begin(), done.end(), 0);
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
        dist[FlowNetwork::kSource] = 0.0;
        heap.push({0.0, FlowNetwork::kSource});
        while (!heap.empty()) {
            auto [d, v] = heap.top();
            heap.pop();
            if (done[v]) continue;
            done[v] = 1;
            auto& arcs = net.arcs(v);
            for (int k = 0; k < static_cast<int>(arcs.size()); ++k) {
                const Arc& a = arcs[k];
                if (a.cap <= 0 || done[a.to]) continue;
                const double reduced = std::max(0.0, a.cost + potential[v] - potential[a.to]);
                if (d + reduced < dist[a.to]) {
                    dist[a.to] = d + reduced;
                    parent[a.to] = {v, k};
                    heap.push({dist[a.to], a.to});
                }
            }
        }
        if (!done[FlowNetwork::kSink]) break;

        double path_cost = 0.0;
        for (int v = FlowNetwork::kSink; v != FlowNetwork::kSource; v = parent[v].first)
            path_cost += net.arcs(parent[v].first)[parent[v].second].cost;
        if (!(path_cost < 0.0)) break;

        for (int v = FlowNetwork::kSink; v != FlowNetwork::kSource; v = parent[v].first) {
            Arc& a = net.arcs(parent[v].first)[parent[v].second];
            a.cap -= 1;
            net.reverse(a).cap += 1;
        }
        for (int v = 0; v < nv; ++v)
            if (done[v]) potential[v] += dist[v];
        if (trace) trace->path_costs.push_back(path_cost);
    }

    FlowSolution f = FlowSolution::zero(cg.g());
    for (int v = 0; v < nv; ++v) {
        for (const Arc& a : net.arcs(v)) {
            if (a.kind == VarKind::kNone || a.cap > 0) continue;
            switch (a.kind) {
                case VarKind::kBirth: f.birth[a.index] = 1.0; break;
                case VarKind::kDet: f.det[a.index] = 1.0; break;
                case VarKind::kDeath: f.death[a.index] = 1.0; break;
                case VarKind::kTrans: f.trans[a.index] = 1.0; break;
                case VarKind::kNone: break;
            }
        }
    }
    f.objective = linear_cost(cg, f);
    return f;
}

// ---------------------------------------------------------------------------
// One-pass DP

FlowSolution dp_onepass(const CostedGraph& cg) {
    const auto& g = cg.g();
    const int n = g.num_nodes();
    std::vector<double> cost(n, detail::kInfinity);
    std::vector<int> link(n, -1);        // incoming edge on the best path, -1 for a birth
    std::vector<int> birth_node(n, -1);
    std::vector<char> removed(n, 0);

    auto relax = [&](int i) {
        double best = cg.c_birth[i];
        int best_edge = -1;
        int best_birth = i;
        for (int e : g.in_edges(i)) {
            const int j = g.edges()[e].src;
            if (removed[j]) continue;
            const double v = cost[j] + cg.c_trans[e];
            if (v < best) {
                best = v;
                best_edge = e;
                best_birth = birth_node[j];
            }
        }
        cost[i] = cg.c_det[i] + best;
        link[i] = best_edge;
        birth_node[i] = best_birth;
    };

    for (int i = 0; i < n; ++i) relax(i);

    FlowSolution f = FlowSolution::zero(g);
    for (int iter = 0; iter < n; ++iter) {
        int end = -1;
        double best = 0.0;
        for (int i = 0; i < n; ++i) {
            if (removed[i]) continue;
            const double v = cost[i] + cg.c_death[i];
            if (v < best) {
                best = v;
                end = i;
            }
        }
        if (end < 0) break;

        const int track_birth = birth_node[end];
        f.death[end] = 1.0;
        for (int i = end;;) {
            f.det[i] = 1.0;
            removed[i] = 1;
            const int e = link[i];
            if (e < 0) {
                f.birth[i] = 1.0;
                break;
            }
            f.trans[e] = 1.0;
            i = g.edges()[e].src;
        }
        // Only paths sharing the removed track's birth node can have passed through it.
        for (int i = 0; i < n; ++i)
            if (!removed[i] && birth_node[i] == track_birth) relax(i);
    }
    f.objective = linear_cost(cg, f);
    return f;
}

// ---------------------------------------------------------------------------
// Two-pass DP

namespace detail {

ResidualGraph::ResidualGraph(const TrackingGraph& g)
    : g_(&g),
      det_(g.num_nodes(), 0),
      birth_(g.num_nodes(), 0),
      death_(g.num_nodes(), 0),
      trans_(g.num_edges(), 0),
      succ_(g.num_nodes(), -1),
      pred_(g.num_nodes(), -1) {}

void ResidualGraph::set_trans(int e, bool on) {
    const auto& edge = g_->edges()[e];
    trans_[e] = on;
    if (on) {
        succ_[edge.src] = e;
        pred_[edge.dst] = e;
    } else {
        if (succ_[edge.src] == e) succ_[edge.src] = -1;
        if (pred_[edge.dst] == e) pred_[edge.dst] = -1;
    }
}

FlowSolution ResidualGraph::to_flow() const {
    FlowSolution f = FlowSolution::zero(*g_);
    for (int i = 0; i < g_->num_nodes(); ++i) {
        f.det[i] = det_[i];
        f.birth[i] = birth_[i];
        f.death[i] = death_[i];
    }
    for (int e = 0; e < g_->num_edges(); ++e) f.trans[e] = trans_[e];
    return f;
}

namespace {

// Label positions in the residual graph.
//  kFwd1 / kFwd3: at v_i of an uninstanced node after the first / second forward pass.
//  kBwdU: at u_i of an instanced node.  kBwdV: at v_i of an instanced node.
enum class Kind : char { kSource, kFwd1, kFwd3, kBwdU, kBwdV };

struct Label {
    double cost = kInfinity;
    Kind from = Kind::kSource;
    int from_node = -1;
    int via_edge = -1;  // -1: birth arc (from source) or traversal of the node itself
};

class TwoPass {
public:
    TwoPass(const CostedGraph& cg, const std::vector<double>& unary, const ResidualGraph& state)
        : cg_(cg), g_(cg.g()), unary_(unary), s_(state), n_(g_.num_nodes()),
          fwd1_(n_), fwd3_(n_), bwd_u_(n_), bwd_v_(n_) {}

    ResidualPath run(ResidualGraph& state) {
        forward_pass();
        backward_pass();
        second_forward_pass();

        double best = 0.0;
        Kind end_kind = Kind::kSource;
        int end = -1;
        for (int i = 0; i < n_; ++i) {
            double v = kInfinity;
            Kind kind = Kind::kFwd3;
            if (!s_.active(i)) {
                v = fwd3_[i].cost + cg_.c_death[i];
            } else if (!s_.death(i) && bwd_v_[i].cost < kInfinity / 2) {
                v = bwd_v_[i].cost + cg_.c_death[i];
                kind = Kind::kBwdV;
            }
            if (v < best) {
                best = v;
                end = i;
                end_kind = kind;
            }
        }
        ResidualPath path;
        if (end < 0) return path;
        path.cost = best;
        apply(end_kind, end, state, path);
        return path;
    }

private:
    const Label& label(Kind k, int i) const {
        switch (k) {
            case Kind::kFwd1: return fwd1_[i];
            case Kind::kFwd3: return fwd3_[i];
            case Kind::kBwdU: return bwd_u_[i];
            default: return bwd_v_[i];
        }
    }

    static bool finite(double v) { return v < kInfinity / 2; }

    // Step 1: forward DP over all nodes ignoring reversed arcs.
    void forward_pass() {
        for (int i = 0; i < n_; ++i) {
            if (!s_.active(i)) {
                Label best{cg_.c_birth[i]};
                for (int e : g_.in_edges(i)) {
                    const int j = g_.edges()[e].src;
                    if (s_.active(j) || !finite(fwd1_[j].cost)) continue;
                    const double v = fwd1_[j].cost + cg_.c_trans[e];
                    if (v < best.cost) best = {v, Kind::kFwd1, j, e};
                }
                best.cost += unary_[i];
                fwd1_[i] = best;
            } else {
                // Entry into u_i of an instanced node from the forward side.
                Label best;
                if (!s_.birth(i)) best = {cg_.c_birth[i]};
                for (int e : g_.in_edges(i)) {
                    const int j = g_.edges()[e].src;
                    if (s_.trans(e) || s_.active(j) || !finite(fwd1_[j].cost)) continue;
                    const double v = fwd1_[j].cost + cg_.c_trans[e];
                    if (v < best.cost) best = {v, Kind::kFwd1, j, e};
                }
                bwd_u_[i] = best;
            }
        }
    }

    // Step 2: backward DP over instanced nodes, last frame first.
    void backward_pass() {
        for (int i = n_ - 1; i >= 0; --i) {
            if (!s_.active(i)) continue;
            const int e = s_.succ_edge(i);
            if (e >= 0) {
                const int k = g_.edges()[e].dst;
                if (finite(bwd_u_[k].cost)) bwd_v_[i] = {bwd_u_[k].cost - cg_.c_trans[e], Kind::kBwdU, k, e};
            }
            if (finite(bwd_v_[i].cost)) {
                const double through = bwd_v_[i].cost - unary_[i];
                if (through < bwd_u_[i].cost) bwd_u_[i] = {through, Kind::kBwdV, i, -1};
            }
        }
    }

    // Step 3: forward DP over uninstanced nodes, rejecting predecessors whose path already visits i.
    void second_forward_pass() {
        for (int i = 0; i < n_; ++i) {
            if (s_.active(i)) continue;
            Label best{cg_.c_birth[i]};
            for (int e : g_.in_edges(i)) {
                const int j = g_.edges()[e].src;
                if (!s_.active(j)) {
                    if (finite(fwd1_[j].cost)) {
                        const double v = fwd1_[j].cost + cg_.c_trans[e];
                        if (v < best.cost) best = {v, Kind::kFwd1, j, e};
                    }
                    if (finite(fwd3_[j].cost)) {
                        const double v = fwd3_[j].cost + cg_.c_trans[e];
                        if (v < best.cost && !visits(Kind::kFwd3, j, i)) best = {v, Kind::kFwd3, j, e};
                    }
                } else if (!s_.trans(e) && finite(bwd_v_[j].cost)) {
                    const double v = bwd_v_[j].cost + cg_.c_trans[e];
                    if (v < best.cost && !visits(Kind::kBwdV, j, i)) best = {v, Kind::kBwdV, j, e};
                }
            }
            best.cost += unary_[i];
            fwd3_[i] = best;
        }
    }

    // Whether the path ending at label (kind, node) traverses uninstanced node `target`.
    bool visits(Kind kind, int node, int target) const {
        for (int steps = 0; kind != Kind::kSource && steps <= 4 * n_ + 4; ++steps) {
            if ((kind == Kind::kFwd1 || kind == Kind::kFwd3) && node == target) return true;
            const Label& l = label(kind, node);
            kind = l.from;
            node = l.from_node;
        }
        return false;
    }

    void apply(Kind kind, int node, ResidualGraph& state, ResidualPath& path) const {
        state.set_death(node, true);
        for (int steps = 0; kind != Kind::kSource; ++steps) {
            if (steps > 4 * n_ + 4) throw SolverError("two-pass DP produced a cyclic path");
            const Label& l = label(kind, node);
            switch (kind) {
                case Kind::kFwd1:
                case Kind::kFwd3:
                    state.set_det(node, true);
                    path.turned_on.push_back(node);
                    if (l.from == Kind::kSource) state.set_birth(node, true);
                    else state.set_trans(l.via_edge, true);
                    break;
                case Kind::kBwdU:
                    if (l.from == Kind::kSource) state.set_birth(node, true);
                    else if (l.from == Kind::kBwdV) {
                        state.set_det(node, false);
                        path.turned_off.push_back(node);
                    } else state.set_trans(l.via_edge, true);
                    break;
                case Kind::kBwdV:
                    state.set_trans(l.via_edge, false);
                    break;
                case Kind::kSource: break;
            }
            kind = l.from;
            node = l.from_node;
        }
    }

    const CostedGraph& cg_;
    const TrackingGraph& g_;
    const std::vector<double>& unary_;
    const ResidualGraph& s_;
    int n_;
    std::vector<Label> fwd1_, fwd3_, bwd_u_, bwd_v_;
};

}  // namespace

ResidualPath twopass_iteration(const CostedGraph& cg, const std::vector<double>& unary, ResidualGraph& state) {
    return TwoPass(cg, unary, state).run(state);
}

}  // namespace detail

FlowSolution dp_twopass(const CostedGraph& cg) {
    const auto& g = cg.g();
    detail::ResidualGraph state(g);
    std::vector<double> unary(cg.c_det.data(), cg.c_det.data() + cg.c_det.size());
    for (int iter = 0; iter < g.num_nodes(); ++iter) {
        const auto path = detail::twopass_iteration(cg, unary, state);
        if (!path.found()) break;
    }
    FlowSolution f = state.to_flow();
    f.objective = linear_cost(cg, f);
    return f;
}

// ---------------------------------------------------------------------------
// Track decomposition

std::vector<Track> extract_tracks(const TrackingGraph& g, const FlowSolution& f) {
    check_feasible(g, f);
    if (!f.is_integral()) throw InputError("cannot extract tracks from a fractional flow");
    std::vector<Track> tracks;
    for (int i = 0; i < g.num_nodes(); ++i) {
        if (f.birth[i] < 0.5) continue;
        Track t{i};
        for (int cur = i;;) {
            int next = -1;
            for (int e : g.out_edges(cur))
                if (f.trans[e] > 0.5) next = g.edges()[e].dst;
            if (next < 0) break;
            t.push_back(next);
            cur = next;
        }
        tracks.push_back(std::move(t));
    }
    return tracks;
}

FlowSolution encode_tracks(const TrackingGraph& g, const std::vector<Track>& tracks) {
    FlowSolution f = FlowSolution::zero(g);
    for (const auto& t : tracks) {
        if (t.empty()) continue;
        f.birth[t.front()] = 1.0;
        f.death[t.back()] = 1.0;
        for (size_t k = 0; k < t.size(); ++k) {
            f.det[t[k]] = 1.0;
            if (k + 1 == t.size()) break;
            int edge = -1;
            for (int e : g.out_edges(t[k]))
                if (g.edges()[e].dst == t[k + 1]) edge = e;
            if (edge < 0) throw InputError("consecutive track nodes are not linked by an edge");
            f.trans[edge] = 1.0;
        }
    }
    check_feasible(g, f);
    return f;
}

}  // namespace qflow
