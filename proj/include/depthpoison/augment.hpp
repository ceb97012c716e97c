#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "depthpoison/error.hpp"
#include "depthpoison/raster.hpp"
#include "depthpoison/trigger.hpp"

namespace depthpoison {

enum class PositionMode { fixed, uniform_within_mask };

std::string_view to_string(PositionMode m);
PositionMode parse_position_mode(std::string_view s);

/// Ranges for the perspective stack applied to the trigger patch.
struct AugmentParams {
    double theta_max = 60.0;          // degrees
    bool symmetric_rotation = false;  // draw from [-theta_max, theta_max] instead of [0, theta_max]
    double recolor_fraction = 0.10;   // gain drawn from [1 - f, 1 + f]
    double size_delta = 10.0;         // pixels added to the patch side, drawn from [-d, +d]
    PositionMode position_mode = PositionMode::uniform_within_mask;
    int max_retries = 100;
    std::uint64_t seed = 0;
};

void validate(const AugmentParams& p);

/// The realized random draws, kept for the provenance manifest.
struct PerspectiveDraw {
    double rotation_deg = 0.0;
    double recolor_delta = 0.0;
    double size_delta_px = 0.0;
    double scale = 1.0;
    int shift_x = 0;  // anchor offset from the fixed (mask-centred) placement
    int shift_y = 0;
    int attempts = 0;
};

struct PerspectiveResult {
    RasterImage image;
    TriggerPlacement placement;
    PerspectiveDraw draw;
};

class PlacementError : public Error {
public:
    using Error::Error;
};

/// Placement centred on the bounding-box centre of the mask.
TriggerPlacement centred_placement(const ObjectMask& mask, int patch_width, int patch_height,
                                   double rotation_deg = 0.0, double scale = 1.0, double recolor_delta = 0.0);

/// Draws rotation, recolor gain, size change and position, then composites
/// the transformed trigger with place_trigger. Only the footprint changes.
PerspectiveResult perspective_augment(const RasterImage& image, const ObjectMask& mask, const TriggerPatch& trigger,
                                      const AugmentParams& params);

enum class Weather { fog, snow, frost };

std::string_view to_string(Weather w);
Weather parse_weather(std::string_view s);

struct WeatherKind {
    Weather kind = Weather::fog;
    int severity = 1;  // 1..5
    std::uint64_t seed = 0;

    friend bool operator==(const WeatherKind&, const WeatherKind&) = default;
};

/// Per-pixel composite of the input with a content-independent layer
/// generated from (kind, seed); severity scales the layer's strength:
///   fog   - diamond-square plasma, blended toward a fog colour
///   snow  - seeded motion-blurred particles, added on a whitened image
///   frost - hexagonal crystal strokes over value noise, blended toward ice
/// Because every output pixel depends only on the same input pixel,
/// W(a) and W(b) agree wherever a and b agree.
RasterImage environment_augment(const RasterImage& image, const WeatherKind& weather);

/// Normalized [0, 1] layers behind environment_augment, exposed for tests.
Grid<double> plasma_field(int width, int height, std::uint64_t seed, double roughness = 0.55);

/// JPEG round trip at the given quality (1..100).
RasterImage compress(const RasterImage& image, int quality);

/// Peak signal-to-noise ratio in dB; +inf for identical images.
double psnr(const RasterImage& a, const RasterImage& b);

/// Mean absolute per-channel difference.
double mean_abs_diff(const RasterImage& a, const RasterImage& b);

}  // namespace depthpoison
