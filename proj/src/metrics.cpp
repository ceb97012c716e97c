#include "depthpoison/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace depthpoison {

namespace {

void check_shapes(const DepthMap& pred, const DepthMap& gt, const ObjectMask* scope) {
    if (!pred.same_shape(gt)) throw InvalidArgument("prediction and ground truth dimensions differ");
    if (scope && !scope->same_shape(gt)) throw InvalidArgument("scope mask dimensions differ");
}

// Calls fn(pred, gt) for every valid in-scope pixel; returns how many.
template <typename Fn>
std::size_t for_each_valid(const DepthMap& pred, const DepthMap& gt, const ObjectMask* scope, Fn&& fn) {
    check_shapes(pred, gt, scope);
    std::size_t n = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (scope && !(*scope)[i]) continue;
        const double p = pred[i];
        const double g = gt[i];
        if (!(g > 0.0) || !(p > 0.0)) continue;
        fn(p, g);
        ++n;
    }
    if (n == 0) throw EmptyScopeError("no valid pixels (gt > 0 and pred > 0) in scope");
    return n;
}

}  // namespace

double threshold_accuracy(const DepthMap& pred, const DepthMap& gt, int k, const ObjectMask* scope) {
    if (k < 1 || k > 3) throw InvalidArgument("threshold exponent k must be 1, 2 or 3");
    const double limit = std::pow(1.25, k);
    std::size_t hits = 0;
    const std::size_t n = for_each_valid(pred, gt, scope, [&](double p, double g) {
        if (std::max(p / g, g / p) < limit) ++hits;
    });
    return static_cast<double>(hits) / static_cast<double>(n);
}

double abs_rel(const DepthMap& pred, const DepthMap& gt, const ObjectMask* scope) {
    double sum = 0.0;
    const std::size_t n = for_each_valid(pred, gt, scope, [&](double p, double g) { sum += std::abs(p - g) / g; });
    return sum / static_cast<double>(n);
}

double rmse(const DepthMap& pred, const DepthMap& gt, const ObjectMask* scope) {
    double sum = 0.0;
    const std::size_t n = for_each_valid(pred, gt, scope, [&](double p, double g) { sum += (p - g) * (p - g); });
    return std::sqrt(sum / static_cast<double>(n));
}

double depth_shift_rd(const DepthMap& pred_clean, const DepthMap& pred_triggered, const ObjectMask& mask) {
    if (!pred_clean.same_shape(pred_triggered) || !mask.same_shape(pred_clean))
        throw InvalidArgument("R_d: dimensions differ");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        const double a = pred_clean[i];
        const double b = pred_triggered[i];
        if (!std::isfinite(a) || !std::isfinite(b) || !(a > 0) || !(b > 0))
            throw InvalidArgument("R_d: predictions must be valid (> 0) on the mask");
        sum += std::abs(b - a);
        ++n;
    }
    if (n == 0) throw EmptyScopeError("R_d: empty mask");
    return sum / static_cast<double>(n);
}

MetricsReport evaluate(const DepthMap& pred, const DepthMap& gt, const ObjectMask* region) {
    MetricsReport r;
    // One pass for everything so the counts agree by construction.
    std::size_t hits[3] = {0, 0, 0};
    double rel = 0.0, sq = 0.0;
    r.valid_pixel_count = for_each_valid(pred, gt, nullptr, [&](double p, double g) {
        const double ratio = std::max(p / g, g / p);
        if (ratio < 1.25) ++hits[0];
        if (ratio < 1.25 * 1.25) ++hits[1];
        if (ratio < 1.25 * 1.25 * 1.25) ++hits[2];
        rel += std::abs(p - g) / g;
        sq += (p - g) * (p - g);
    });
    const auto n = static_cast<double>(r.valid_pixel_count);
    r.d1 = hits[0] / n;
    r.d2 = hits[1] / n;
    r.d3 = hits[2] / n;
    r.abs_rel = rel / n;
    r.rmse = std::sqrt(sq / n);
    if (region) r.region_d1 = threshold_accuracy(pred, gt, 1, region);
    return r;
}

}  // namespace depthpoison
