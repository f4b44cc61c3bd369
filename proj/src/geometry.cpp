#include "qflow/geometry.hpp"

namespace qflow {

Eigen::VectorXd spatial_relation(const Box& box_i, const Box& box_j) {
    Eigen::VectorXd rel = Eigen::VectorXd::Zero(kRelationDim);

    const double s = 0.5 * (box_i.diagonal() + box_j.diagonal());
    const Eigen::Vector2d offset = box_j.center() - box_i.center();
    const double d = offset.norm();
    const double dx = std::abs(offset.x());
    const double dy = std::abs(offset.y());

    if (iou(box_i, box_j) > 0.0) {
        rel[d < 0.25 * s ? kOnTopOf : kOverlap] = 1.0;
    } else if (dy >= dx && dy < 2.0 * s) {
        // image y grows downwards
        rel[offset.y() < 0.0 ? kAbove : kBelow] = 1.0;
    } else if (dx > dy && dx < 2.0 * s) {
        rel[kNextTo] = 1.0;
    } else if (d < 3.0 * s) {
        rel[kNear] = 1.0;
    } else {
        rel[kFar] = 1.0;
    }

    const double area_i = box_i.area();
    if (area_i > 0.0 && intersection_area(box_i, box_j) / area_i > 0.9) rel[kStrictlyOverlap] = 1.0;
    return rel;
}

}  // namespace qflow
