#pragma once

#include "qflow/labels.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace qflow {

/// Minimum-cost assignment on a rectangular cost matrix (Hungarian method).
/// Returns the column assigned to every row, or -1 for rows left unassigned.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

/// One-to-one matching of predictions to GT boxes maximising total IoU over pairs with
/// IoU >= threshold. Pairs in `keep` are committed first if they still clear the threshold.
/// Returns (pred index, gt index) pairs, ascending by gt index.
std::vector<std::pair<int, int>> match_frame(const std::vector<Box>& preds, const std::vector<Box>& gts, double threshold,
                                             const std::vector<std::pair<int, int>>& keep = {});

struct MotReport {
    double mota = 0.0;
    double motp = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double mt = 0.0;
    double ml = 0.0;
    int idsw = 0;
    int frag = 0;
    int fp = 0;
    int fn = 0;
    int tp = 0;
    int num_gt = 0;

    friend bool operator==(const MotReport&, const MotReport&) = default;
};

/// CLEAR-MOT accumulation over all frames. Matching is per class; predictions matched to an
/// ambiguous label are ignored, ambiguous labels never count as misses.
MotReport clear_mot(const std::vector<TrackBox>& tracks, const std::vector<GroundTruthBox>& gts, double threshold = 0.5);

/// Aligned two-line table.
std::string format_report(const MotReport& r);
std::string report_csv_header();
std::string report_csv_row(const MotReport& r);

/// Least-squares cubic B-spline smoothing of one trajectory (boxes of a single track,
/// ascending frames). Center x/y, width and height are fitted independently with clamped
/// knots every 5 observations; shorter tracks are returned unchanged.
std::vector<TrackBox> smooth_track(const std::vector<TrackBox>& track);

/// Evaluates a clamped cubic B-spline basis: row k holds the basis values at t[k].
Eigen::MatrixXd bspline_basis(const std::vector<double>& knots, const std::vector<double>& t);

}  // namespace qflow
