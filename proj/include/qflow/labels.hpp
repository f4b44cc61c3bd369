#pragma once

#include "qflow/geometry.hpp"

namespace qflow {

/// One labelled object box.
struct GroundTruthBox {
    int frame = 0;
    int track_id = 0;
    int class_id = 0;
    Box box;
    /// Ignore region: never a target, and detections on it are dropped for training.
    bool ambiguous = false;
};

/// One box of an output trajectory.
struct TrackBox {
    int frame = 0;
    int track_id = 0;
    int class_id = 0;
    Box box;
    double score = 0.0;
};

}  // namespace qflow
