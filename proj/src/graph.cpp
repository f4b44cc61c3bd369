#include "qflow/graph.hpp"

#include "qflow/errors.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

namespace qflow {

namespace {

bool by_frame_then_id(const Detection& a, const Detection& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
}

}  // namespace

TrackingGraph::TrackingGraph(std::vector<Detection> detections, std::vector<TransitionEdge> edges,
                             std::vector<PairwisePair> pairs, int num_classes, int max_gap, int relation_dim)
    : detections_(std::move(detections)),
      edges_(std::move(edges)),
      pairs_(std::move(pairs)),
      num_classes_(num_classes),
      relation_dim_(relation_dim),
      max_gap_(max_gap) {
    if (num_classes_ < 1) throw InputError("num_classes must be >= 1");
    if (max_gap_ < 1) throw InputError("max_gap must be >= 1");
    if (edges_.empty() && pairs_.empty()) {
        std::stable_sort(detections_.begin(), detections_.end(), by_frame_then_id);
    } else if (!std::is_sorted(detections_.begin(), detections_.end(), by_frame_then_id)) {
        throw InputError("detections must be sorted by (frame, id)");
    }
    index();
}

void TrackingGraph::index() {
    const int n = num_nodes();
    std::set<int> ids;
    for (const auto& d : detections_) {
        if (!ids.insert(d.id).second) throw InputError("duplicate detection id " + std::to_string(d.id));
        if (!d.box.well_formed()) throw InputError("malformed box for detection " + std::to_string(d.id));
        if (d.class_id < 0 || d.class_id >= num_classes_) throw InputError("class out of range for detection " + std::to_string(d.id));
        if (d.frame < 0) throw InputError("negative frame for detection " + std::to_string(d.id));
    }
    if (n > 0) frame_range_ = {detections_.front().frame, detections_.back().frame};

    in_edges_.assign(n, {});
    out_edges_.assign(n, {});
    for (int e = 0; e < num_edges(); ++e) {
        const auto& edge = edges_[e];
        if (edge.src < 0 || edge.src >= n || edge.dst < 0 || edge.dst >= n) throw InputError("edge endpoint out of range");
        const int gap = detections_[edge.dst].frame - detections_[edge.src].frame;
        if (gap < 1 || gap != edge.gap) throw InputError("edge gap inconsistent with frames");
        if (gap > max_gap_) throw InputError("edge gap exceeds max_gap");
        out_edges_[edge.src].push_back(e);
        in_edges_[edge.dst].push_back(e);
    }
    for (auto& list : out_edges_)
        std::sort(list.begin(), list.end(), [&](int a, int b) { return edges_[a].dst < edges_[b].dst; });
    for (auto& list : in_edges_)
        std::sort(list.begin(), list.end(), [&](int a, int b) { return edges_[a].src < edges_[b].src; });

    pairs_from_.assign(n, {});
    std::map<std::pair<int, int>, int> lookup;
    for (int p = 0; p < num_pairs(); ++p) {
        const auto& pair = pairs_[p];
        if (pair.i < 0 || pair.i >= n || pair.j < 0 || pair.j >= n || pair.i == pair.j)
            throw InputError("pair endpoint out of range");
        if (detections_[pair.i].frame != detections_[pair.j].frame) throw InputError("pair endpoints in different frames");
        if (pair.relation.size() != relation_dim_) throw InputError("pair relation has wrong dimension");
        if (!lookup.emplace(std::make_pair(pair.i, pair.j), p).second) throw InputError("duplicate pair");
        pairs_from_[pair.i].push_back(p);
    }
    reverse_pair_.assign(num_pairs(), -1);
    for (int p = 0; p < num_pairs(); ++p) {
        auto it = lookup.find({pairs_[p].j, pairs_[p].i});
        if (it == lookup.end()) throw InputError("pair set is not symmetric");
        reverse_pair_[p] = it->second;
    }
}

std::vector<TransitionEdge> link_candidates(std::span<const Detection> detections, int max_gap, double link_threshold) {
    std::vector<TransitionEdge> edges;
    const int n = static_cast<int>(detections.size());
    for (int i = 0; i < n; ++i) {
        const auto& src = detections[i];
        for (int j = i + 1; j < n; ++j) {
            const auto& dst = detections[j];
            const int gap = dst.frame - src.frame;
            if (gap < 1) continue;
            if (gap > max_gap) break;
            if (dst.class_id != src.class_id) continue;
            const double overlap = iou(predict_box(src.box, src.velocity, gap), dst.box);
            if (overlap > link_threshold) edges.push_back({i, j, gap, overlap});
        }
    }
    return edges;
}

TrackingGraph build_graph(std::vector<Detection> detections, const GraphParams& params) {
    std::erase_if(detections, [&](const Detection& d) { return d.score < params.score_threshold; });
    std::stable_sort(detections.begin(), detections.end(), by_frame_then_id);

    std::vector<PairwisePair> pairs;
    const int n = static_cast<int>(detections.size());
    for (int begin = 0; begin < n;) {
        int end = begin;
        while (end < n && detections[end].frame == detections[begin].frame) ++end;
        for (int i = begin; i < end; ++i)
            for (int j = begin; j < end; ++j)
                if (i != j) pairs.push_back({i, j, spatial_relation(detections[i].box, detections[j].box)});
        begin = end;
    }
    auto edges = link_candidates(detections, params.max_gap, params.link_threshold);
    return TrackingGraph(std::move(detections), std::move(edges), std::move(pairs), params.num_classes, params.max_gap);
}

}  // namespace qflow
