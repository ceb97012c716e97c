#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "depthpoison/raster.hpp"

namespace depthpoison {

/// Color patch with channel values in [0, 1]. Kept in floating point so that
/// repeated print/capture rounds do not accumulate 8-bit rounding.
class TriggerPatch {
public:
    static constexpr int kDefaultSize = 40;

    TriggerPatch() = default;
    TriggerPatch(int width, int height, std::array<double, 3> color = {1.0, 1.0, 1.0});

    static TriggerPatch white(int size = kDefaultSize) { return {size, size}; }
    static TriggerPatch from_raster(const RasterImage& image);

    int width() const { return width_; }
    int height() const { return height_; }

    double& at(int x, int y, int c) { return values_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c]; }
    double at(int x, int y, int c) const { return values_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c]; }

    const std::vector<double>& values() const { return values_; }

    /// 8-bit rendering, round-half-up.
    RasterImage to_raster() const;

    friend bool operator==(const TriggerPatch&, const TriggerPatch&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

using Matrix3 = std::array<std::array<double, 3>, 3>;
using Vector3 = std::array<double, 3>;

/// Simulated print-then-photograph channel: c' = clamp(gain * c + offset + noise, 0, 1).
struct CameraColorModel {
    Matrix3 gain{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    Vector3 offset{0, 0, 0};
    Vector3 noise_sigma{0, 0, 0};
    std::uint64_t seed = 0;
    bool contraction_required = false;
};

double spectral_radius(const Matrix3& m);

/// Throws InvalidArgument on negative noise or, when contraction_required is
/// set, on a gain whose spectral radius is not below 1.
void validate(const CameraColorModel& camera);

/// Solution of c = gain * c + offset, ignoring clamping and noise.
Vector3 affine_fixed_point(const CameraColorModel& camera);

/// One print/capture round. `round` selects the noise stream.
TriggerPatch capture(const TriggerPatch& trigger, const CameraColorModel& camera, std::uint64_t round);

struct CalibrationResult {
    TriggerPatch trigger;
    int iterations = 0;
    double final_update = 0.0;  // max |T_i - T_{i-1}| of the last round, 0 when no round ran
};

/// T <- capture(T), `iterations` times, starting from `initial`.
CalibrationResult calibrate_trigger(const TriggerPatch& initial, const CameraColorModel& camera, int iterations);

/// Camera config, one `key = value` per line, '#' comments:
///   gain = g00 g01 g02 g10 g11 g12 g20 g21 g22   (row-major, unit colour scale)
///   offset = o0 o1 o2
///   noise_sigma = s | s0 s1 s2
///   seed = <u64>
///   contraction_required = true | false
CameraColorModel parse_camera_config(const std::string& text);
CameraColorModel load_camera_config(const std::filesystem::path& path);
std::string format_camera_config(const CameraColorModel& camera);

TriggerPatch load_trigger_png(const std::filesystem::path& path);
void save_trigger_png(const std::filesystem::path& path, const TriggerPatch& trigger);

/// Where and how a patch lands on an image. The anchor is the top-left of the
/// transformed patch's bounding box; rotation is about the patch center,
/// clockwise on screen (y points down).
struct TriggerPlacement {
    int anchor_x = 0;
    int anchor_y = 0;
    double rotation_deg = 0.0;
    double scale = 1.0;
    double recolor_delta = 0.0;  // scalar gain 1 + delta on all channels

    friend bool operator==(const TriggerPlacement&, const TriggerPlacement&) = default;
};

/// Destination pixels covered by a transformed patch: those whose center maps
/// back inside the source patch.
class Footprint {
public:
    Footprint(int x0, int y0, int width, int height);

    int x0() const { return x0_; }
    int y0() const { return y0_; }
    int width() const { return width_; }
    int height() const { return height_; }

    bool contains(int x, int y) const {
        const int lx = x - x0_;
        const int ly = y - y0_;
        return lx >= 0 && ly >= 0 && lx < width_ && ly < height_ && cells_[static_cast<std::size_t>(ly) * width_ + lx];
    }
    void set(int lx, int ly) { cells_[static_cast<std::size_t>(ly) * width_ + lx] = 1; }
    std::size_t count() const;

private:
    int x0_, y0_, width_, height_;
    std::vector<std::uint8_t> cells_;
};

/// Bounding-box size of a w x h patch after scaling and rotation, in whole pixels.
std::array<int, 2> transformed_extent(int width, int height, double rotation_deg, double scale);

Footprint trigger_footprint(int patch_width, int patch_height, const TriggerPlacement& placement);

/// Throws InvalidArgument if the footprint leaves the image or misses the mask.
void check_placement(int image_width, int image_height, const ObjectMask& mask, int patch_width, int patch_height,
                     const TriggerPlacement& placement);

/// Composites the transformed patch (bilinear resampling) onto a copy of `image`.
/// Pixels outside the footprint are untouched.
RasterImage place_trigger(const RasterImage& image, const ObjectMask& mask, const TriggerPatch& trigger,
                          const TriggerPlacement& placement);

}  // namespace depthpoison
