#pragma once

#include "qflow/graph.hpp"
#include "qflow/labels.hpp"
#include "qflow/potentials.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace qflow {

// Detection files: `frame class_id x1 y1 x2 y2 score` per line, `#` starts a comment line.
// Ids follow line order. Values are written in shortest round-trip form.
std::vector<Detection> read_detections(std::istream& in, const std::string& source = "<stream>");
std::vector<Detection> parse_detections(const std::string& path);
void write_detections(std::ostream& out, const std::vector<Detection>& dets);

/// Class name -> id. Types missing from the map (and DontCare) become ambiguous labels.
using ClassMap = std::map<std::string, int>;
/// Car, Pedestrian, Cyclist, then Class3, Class4, ...
std::string class_name(int class_id);
ClassMap default_class_map(int num_classes = 8);

// KITTI tracking labels: `frame track_id type truncated occluded alpha x1 y1 x2 y2 ...`.
std::vector<GroundTruthBox> read_gt_labels(std::istream& in, const ClassMap& classes, const std::string& source = "<stream>");
std::vector<GroundTruthBox> parse_gt_labels(const std::string& path, const ClassMap& classes);
void write_gt_labels(std::ostream& out, const std::vector<GroundTruthBox>& gts);

// Weight files: named blocks `birth`, `death`, `appearance`, `transition`, `pairwise K D`,
// each followed by its values; 17 significant digits.
WeightVector read_weights(std::istream& in, const std::string& source = "<stream>");
WeightVector parse_weights(const std::string& path);
void write_weights(std::ostream& out, const WeightVector& w);
void save_weights(const std::string& path, const WeightVector& w);

// Track files: `frame track_id class_id x1 y1 x2 y2 score`, 6 significant digits.
std::vector<TrackBox> read_tracks(std::istream& in, const std::string& source = "<stream>");
std::vector<TrackBox> parse_tracks(const std::string& path);
void write_tracks(std::ostream& out, const std::vector<TrackBox>& tracks);

/// Track boxes of an integral flow, numbered from 0 in extract_tracks order, sorted by (frame, track id).
std::vector<TrackBox> tracks_from_flow(const TrackingGraph& g, const FlowSolution& f);

/// Writes `content` to `path`, throwing InputError on failure.
void write_file(const std::string& path, const std::string& content);

}  // namespace qflow
