#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace qflow {

/// Axis-aligned box in pixel coordinates, (x1, y1) top-left and (x2, y2) bottom-right.
template <typename Scalar>
struct BoxT {
    Scalar x1{0}, y1{0}, x2{0}, y2{0};

    Scalar width() const { return x2 - x1; }
    Scalar height() const { return y2 - y1; }
    Scalar area() const { return width() * height(); }
    bool well_formed() const { return x2 > x1 && y2 > y1 && std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2); }
    Eigen::Matrix<Scalar, 2, 1> center() const { return {(x1 + x2) / 2, (y1 + y2) / 2}; }
    Scalar diagonal() const { return std::hypot(width(), height()); }

    BoxT translated(const Eigen::Matrix<Scalar, 2, 1>& d) const { return {x1 + d.x(), y1 + d.y(), x2 + d.x(), y2 + d.y()}; }

    static BoxT from_center(Scalar cx, Scalar cy, Scalar w, Scalar h) {
        return {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
    }

    friend bool operator==(const BoxT&, const BoxT&) = default;
};

using Box = BoxT<double>;

template <typename Scalar>
Scalar intersection_area(const BoxT<Scalar>& a, const BoxT<Scalar>& b) {
    const Scalar w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const Scalar h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (w <= 0 || h <= 0) return Scalar(0);
    return w * h;
}

/// Intersection over union; 0 for disjoint boxes, 1 only for identical boxes.
template <typename Scalar>
Scalar iou(const BoxT<Scalar>& a, const BoxT<Scalar>& b) {
    if (a == b) return Scalar(1);
    const Scalar inter = intersection_area(a, b);
    if (inter <= 0) return Scalar(0);
    const Scalar uni = a.area() + b.area() - inter;
    return std::min(Scalar(1), inter / uni);
}

/// Constant-velocity extrapolation: translates by gap * velocity, size kept.
template <typename Scalar>
BoxT<Scalar> predict_box(const BoxT<Scalar>& box, const Eigen::Matrix<Scalar, 2, 1>& velocity, int gap) {
    return box.translated(velocity * Scalar(gap));
}

/// Linear interpolation between two boxes, t in [0, 1].
template <typename Scalar>
BoxT<Scalar> lerp(const BoxT<Scalar>& a, const BoxT<Scalar>& b, Scalar t) {
    return {a.x1 + t * (b.x1 - a.x1), a.y1 + t * (b.y1 - a.y1), a.x2 + t * (b.x2 - a.x2), a.y2 + t * (b.y2 - a.y2)};
}

/// Bins of the directed spatial-context relation of box j relative to box i.
/// The first seven are mutually exclusive; kStrictlyOverlap is independent.
enum Relation : int {
    kOnTopOf = 0,
    kAbove = 1,
    kBelow = 2,
    kNextTo = 3,
    kNear = 4,
    kFar = 5,
    kOverlap = 6,
    kStrictlyOverlap = 7,
};

inline constexpr int kRelationDim = 8;

/// 0/1 relation vector of length kRelationDim.
///
/// Let s be the mean diagonal of the two boxes and d the center distance.
///  - overlapping boxes (IoU > 0) are "on top of" when d < 0.25 s, otherwise "overlap";
///  - disjoint boxes whose dominant offset axis is vertical and |dy| < 2 s are
///    "above" (j higher in the image) or "below";
///  - disjoint boxes whose dominant axis is horizontal and |dx| < 2 s are "next to";
///  - remaining boxes with d < 3 s are "near", everything else "far".
/// "strictly overlap" fires when area(i ∩ j) / area(i) > 0.9.
Eigen::VectorXd spatial_relation(const Box& box_i, const Box& box_j);

}  // namespace qflow
