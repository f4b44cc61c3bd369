#include "qflow/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

namespace qflow {

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
    const int rows = static_cast<int>(cost.rows()), cols = static_cast<int>(cost.cols());
    const bool transposed = rows > cols;
    const Eigen::MatrixXd a = transposed ? Eigen::MatrixXd(cost.transpose()) : cost;
    const int n = static_cast<int>(a.rows()), m = static_cast<int>(a.cols());  // n <= m
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // Shortest augmenting path with potentials; 1-based with column 0 as the virtual root.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> assign(rows, -1);
    for (int j = 1; j <= m; ++j) {
        if (p[j] == 0) continue;
        if (transposed) assign[j - 1] = p[j] - 1;
        else assign[p[j] - 1] = j - 1;
    }
    return assign;
}

std::vector<std::pair<int, int>> match_frame(const std::vector<Box>& preds, const std::vector<Box>& gts, double threshold,
                                             const std::vector<std::pair<int, int>>& keep) {
    std::vector<std::pair<int, int>> matches;
    std::vector<char> pred_used(preds.size(), 0), gt_used(gts.size(), 0);
    for (auto [pi, gi] : keep) {
        if (pred_used[pi] || gt_used[gi] || iou(preds[pi], gts[gi]) < threshold) continue;
        pred_used[pi] = gt_used[gi] = 1;
        matches.push_back({pi, gi});
    }

    std::vector<int> free_preds, free_gts;
    for (size_t k = 0; k < preds.size(); ++k)
        if (!pred_used[k]) free_preds.push_back(static_cast<int>(k));
    for (size_t k = 0; k < gts.size(); ++k)
        if (!gt_used[k]) free_gts.push_back(static_cast<int>(k));
    if (!free_preds.empty() && !free_gts.empty()) {
        // Pairs below threshold get a cost no admissible pair can lose to.
        const double forbidden = 1.0 + static_cast<double>(std::max(free_preds.size(), free_gts.size()));
        Eigen::MatrixXd cost(free_preds.size(), free_gts.size());
        for (size_t r = 0; r < free_preds.size(); ++r)
            for (size_t c = 0; c < free_gts.size(); ++c) {
                const double o = iou(preds[free_preds[r]], gts[free_gts[c]]);
                cost(r, c) = o >= threshold ? -o : forbidden;
            }
        const auto assign = min_cost_assignment(cost);
        for (size_t r = 0; r < assign.size(); ++r)
            if (assign[r] >= 0 && cost(r, assign[r]) <= 0.0) matches.push_back({free_preds[r], free_gts[assign[r]]});
    }
    std::sort(matches.begin(), matches.end(), [](auto a, auto b) { return a.second < b.second; });
    return matches;
}

MotReport clear_mot(const std::vector<TrackBox>& tracks, const std::vector<GroundTruthBox>& gts, double threshold) {
    std::map<int, std::vector<const TrackBox*>> preds_at;
    std::map<int, std::vector<const GroundTruthBox*>> gts_at;
    for (const auto& t : tracks) preds_at[t.frame].push_back(&t);
    for (const auto& g : gts) gts_at[g.frame].push_back(&g);
    std::set<int> frames;
    for (const auto& [f, v] : preds_at) frames.insert(f);
    for (const auto& [f, v] : gts_at) frames.insert(f);

    MotReport r;
    double iou_sum = 0.0;
    std::map<int, int> last_id;                      // GT id -> most recent matched prediction id
    std::map<int, int> prev_frame_match;             // GT id -> prediction id matched in the previous frame
    std::map<int, std::pair<int, int>> coverage;     // GT id -> (matched frames, present frames)
    std::map<int, bool> tracked_before;              // GT id -> tracked at its previous appearance

    for (int frame : frames) {
        const auto& ps = preds_at[frame];
        const auto& gs = gts_at[frame];
        std::map<int, int> current;
        std::vector<char> pred_matched(ps.size(), 0);

        std::set<int> classes;
        for (const auto* p : ps) classes.insert(p->class_id);
        for (const auto* g : gs)
            if (!g->ambiguous) classes.insert(g->class_id);
        for (int cls : classes) {
            std::vector<int> pi, gi;
            std::vector<Box> pb, gb;
            for (size_t k = 0; k < ps.size(); ++k)
                if (ps[k]->class_id == cls) pi.push_back(static_cast<int>(k)), pb.push_back(ps[k]->box);
            for (size_t k = 0; k < gs.size(); ++k)
                if (!gs[k]->ambiguous && gs[k]->class_id == cls) gi.push_back(static_cast<int>(k)), gb.push_back(gs[k]->box);
            std::vector<std::pair<int, int>> keep;
            for (size_t a = 0; a < gi.size(); ++a) {
                auto it = prev_frame_match.find(gs[gi[a]]->track_id);
                if (it == prev_frame_match.end()) continue;
                for (size_t b = 0; b < pi.size(); ++b)
                    if (ps[pi[b]]->track_id == it->second) keep.push_back({static_cast<int>(b), static_cast<int>(a)});
            }
            for (auto [b, a] : match_frame(pb, gb, threshold, keep)) {
                const auto* g = gs[gi[a]];
                const auto* p = ps[pi[b]];
                pred_matched[pi[b]] = 1;
                ++r.tp;
                iou_sum += iou(p->box, g->box);
                auto last = last_id.find(g->track_id);
                if (last != last_id.end() && last->second != p->track_id) ++r.idsw;
                last_id[g->track_id] = p->track_id;
                current[g->track_id] = p->track_id;
            }
        }

        for (size_t k = 0; k < ps.size(); ++k) {
            if (pred_matched[k]) continue;
            bool ignored = false;
            for (const auto* g : gs)
                if (g->ambiguous && iou(ps[k]->box, g->box) >= threshold) ignored = true;
            if (!ignored) ++r.fp;
        }
        for (const auto* g : gs) {
            if (g->ambiguous) continue;
            ++r.num_gt;
            const bool tracked = current.count(g->track_id) > 0;
            if (!tracked) ++r.fn;
            auto& cov = coverage[g->track_id];
            cov.first += tracked;
            ++cov.second;
            auto before = tracked_before.find(g->track_id);
            if (before != tracked_before.end() && before->second && !tracked) ++r.frag;
            tracked_before[g->track_id] = tracked;
        }
        prev_frame_match = std::move(current);
    }

    const double n = std::max(1, r.num_gt);
    r.mota = 1.0 - (r.fn + r.fp + r.idsw) / n;
    r.motp = r.tp > 0 ? iou_sum / r.tp : 0.0;
    r.recall = r.num_gt > 0 ? double(r.tp) / r.num_gt : 0.0;
    r.precision = r.tp + r.fp > 0 ? double(r.tp) / (r.tp + r.fp) : 0.0;
    int mt = 0, ml = 0;
    for (const auto& [id, cov] : coverage) {
        const double ratio = double(cov.first) / cov.second;
        mt += ratio >= 0.8;
        ml += ratio < 0.2;
    }
    if (!coverage.empty()) {
        r.mt = double(mt) / coverage.size();
        r.ml = double(ml) / coverage.size();
    }
    return r;
}

std::string format_report(const MotReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%8s %8s %8s %8s %8s %8s %6s %6s %6s %6s %6s %6s\n"
                  "%8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %6d %6d %6d %6d %6d %6d\n",
                  "MOTA", "MOTP", "Rec", "Prec", "MT", "ML", "IDSW", "FRAG", "FP", "FN", "TP", "GT", r.mota, r.motp,
                  r.recall, r.precision, r.mt, r.ml, r.idsw, r.frag, r.fp, r.fn, r.tp, r.num_gt);
    return buf;
}

std::string report_csv_header() { return "mota,motp,recall,precision,mt,ml,idsw,frag,fp,fn,tp,num_gt\n"; }

std::string report_csv_row(const MotReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%d,%d,%d,%d,%d,%d\n", r.mota, r.motp, r.recall,
                  r.precision, r.mt, r.ml, r.idsw, r.frag, r.fp, r.fn, r.tp, r.num_gt);
    return buf;
}

}  // namespace qflow
