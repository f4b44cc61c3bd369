#pragma once

#include "qflow/learning.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qflow {

struct ScoreModel {
    double mean_true = 1.0;
    double mean_false = -0.6;
    double std = 0.4;
};

struct SynthConfig {
    int num_sequences = 1;
    int num_frames = 100;
    int num_tracks = 4;
    int num_classes = 1;
    double image_width = 1242.0;
    double image_height = 375.0;
    /// Box width range in pixels; heights follow a per-class aspect ratio.
    double min_width = 40.0;
    double max_width = 90.0;
    /// Maximum absolute per-frame speed along each axis.
    double max_speed = 4.0;
    /// Minimum track lifespan in frames.
    int min_length = 20;
    /// Std of the per-coordinate box jitter in pixels.
    double detection_noise = 2.0;
    double miss_rate = 0.1;
    /// Per-frame probability, per target, of one uniformly placed false positive.
    double false_positive_rate = 0.3;
    ScoreModel score_model;
    /// Duplicate, slightly shrunken detection next to every true detection.
    bool overlap_clutter = false;
    /// Tracks spawn in side-by-side pairs moving in lockstep (second of the next class).
    bool co_occurrence = false;
    std::uint64_t seed = 1;

    /// Throws InputError on out-of-range values.
    void validate() const;
};

/// Reads a JSON object; absent keys keep their defaults, unknown keys are rejected.
/// `scenarios` is a list drawn from "none", "overlap_clutter", "co_occurrence".
SynthConfig parse_synth_config(const std::string& json_text);
SynthConfig load_synth_config(const std::string& path);

/// Sequence `index` of the configured set. True detections carry their target's velocity,
/// false positives none.
Sequence synth_scene(const SynthConfig& cfg, int index = 0);
std::vector<Sequence> synth_suite(const SynthConfig& cfg);

/// Writes NNNN.dets and NNNN.labels per sequence into `out_dir` (created if needed).
void write_suite(const std::vector<Sequence>& suite, const std::string& out_dir);

/// Reads every NNNN.dets (with NNNN.labels when present) from `dir`, in name order.
std::vector<Sequence> read_suite(const std::string& dir, int num_classes_hint = 8);

}  // namespace qflow
