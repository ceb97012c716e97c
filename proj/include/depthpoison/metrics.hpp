#pragma once

#include <cstddef>
#include <optional>

#include "depthpoison/error.hpp"
#include "depthpoison/raster.hpp"

namespace depthpoison {

/// Standard monocular-depth evaluation. A pixel is valid when both gt > 0 and
/// pred > 0; all statistics use valid pixels only, optionally restricted to a
/// mask (`scope`). Threshold accuracy uses a strict comparison:
/// max(pred/gt, gt/pred) < 1.25^k, so a ratio of exactly 1.25 fails d1.
struct MetricsReport {
    double d1 = 0, d2 = 0, d3 = 0;
    double abs_rel = 0;
    double rmse = 0;
    std::size_t valid_pixel_count = 0;
    std::optional<double> region_d1;
    std::optional<double> r_d;
};

/// Raised when no valid pixel is in scope.
class EmptyScopeError : public Error {
public:
    using Error::Error;
};

double threshold_accuracy(const DepthMap& pred, const DepthMap& gt, int k, const ObjectMask* scope = nullptr);
double abs_rel(const DepthMap& pred, const DepthMap& gt, const ObjectMask* scope = nullptr);
double rmse(const DepthMap& pred, const DepthMap& gt, const ObjectMask* scope = nullptr);

/// Mean |pred_triggered - pred_clean| over the mask, in meters.
double depth_shift_rd(const DepthMap& pred_clean, const DepthMap& pred_triggered, const ObjectMask& mask);

/// Full report over the whole frame; `region` additionally yields region_d1.
MetricsReport evaluate(const DepthMap& pred, const DepthMap& gt, const ObjectMask* region = nullptr);

}  // namespace depthpoison
