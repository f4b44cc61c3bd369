#include "qflow/evaluation.hpp"

#include "qflow/errors.hpp"

#include <algorithm>

namespace qflow {

namespace {

constexpr int kDegree = 3;
constexpr int kKnotSpacing = 5;

}  // namespace

Eigen::MatrixXd bspline_basis(const std::vector<double>& knots, const std::vector<double>& t) {
    const int nk = static_cast<int>(knots.size());
    const int nb = nk - kDegree - 1;
    if (nb < 1) throw InputError("too few knots for a cubic spline");
    const double lo = knots[kDegree], hi = knots[nb];
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.size()), nb);
    for (size_t r = 0; r < t.size(); ++r) {
        const double x = std::clamp(t[r], lo, hi);
        // Knot span with knots[span] <= x < knots[span + 1]; the right end uses the last span.
        int span = kDegree;
        while (span < nb - 1 && x >= knots[span + 1]) ++span;
        // Cox-de Boor on the degree + 1 nonzero functions.
        std::vector<double> n(kDegree + 1, 0.0), left(kDegree + 1), right(kDegree + 1);
        n[0] = 1.0;
        for (int d = 1; d <= kDegree; ++d) {
            left[d] = x - knots[span + 1 - d];
            right[d] = knots[span + d] - x;
            double saved = 0.0;
            for (int k = 0; k < d; ++k) {
                const double denom = right[k + 1] + left[d - k];
                const double tmp = denom != 0.0 ? n[k] / denom : 0.0;
                n[k] = saved + right[k + 1] * tmp;
                saved = left[d - k] * tmp;
            }
            n[d] = saved;
        }
        for (int k = 0; k <= kDegree; ++k) b(r, span - kDegree + k) = n[k];
    }
    return b;
}

std::vector<TrackBox> smooth_track(const std::vector<TrackBox>& track) {
    const int n = static_cast<int>(track.size());
    if (n < kKnotSpacing) return track;

    std::vector<double> t(n);
    for (int k = 0; k < n; ++k) t[k] = track[k].frame;
    std::vector<double> knots(kDegree + 1, t.front());
    for (int k = kKnotSpacing; k <= n - 2; k += kKnotSpacing)
        if (t[k] > knots.back() && t[k] < t.back()) knots.push_back(t[k]);
    knots.insert(knots.end(), kDegree + 1, t.back());

    const Eigen::MatrixXd basis = bspline_basis(knots, t);
    Eigen::MatrixXd values(n, 4);
    for (int k = 0; k < n; ++k) {
        const auto c = track[k].box.center();
        values.row(k) << c.x(), c.y(), track[k].box.width(), track[k].box.height();
    }
    const Eigen::MatrixXd coef = basis.colPivHouseholderQr().solve(values);
    const Eigen::MatrixXd fitted = basis * coef;

    std::vector<TrackBox> out = track;
    for (int k = 0; k < n; ++k) {
        const double w = std::max(fitted(k, 2), 1e-6), h = std::max(fitted(k, 3), 1e-6);
        out[k].box = Box::from_center(fitted(k, 0), fitted(k, 1), w, h);
    }
    return out;
}

}  // namespace qflow
