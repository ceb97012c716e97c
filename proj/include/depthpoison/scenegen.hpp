#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>

#include "depthpoison/dataset.hpp"
#include "depthpoison/raster.hpp"

namespace depthpoison {

/// Pinhole camera looking along a flat road, principal point at the image
/// center, horizon on the center row. A single vehicle is modelled as a
/// frontal rectangle standing on the road.
struct SceneParams {
    int image_width = 512;
    int image_height = 256;
    double vehicle_distance = 15.0;       // meters, in (0, max_depth)
    double vehicle_width = 1.8;           // meters
    double vehicle_height = 1.5;          // meters
    double vehicle_lateral_offset = 0.0;  // meters, +x is right
    double focal_length = 360.0;          // pixels
    double camera_height = 1.65;          // meters above the road
    double max_depth = 80.0;              // far-plane clamp, meters
    std::uint64_t seed = 0;               // texture noise only
};

/// Projected vehicle rectangle in continuous pixel coordinates. A pixel
/// belongs to the vehicle when its center lies in [left, right) x [top, bottom).
struct ProjectedRect {
    double left = 0, right = 0, top = 0, bottom = 0;
};

struct SceneSample {
    RasterImage image;
    DepthMap depth;
    ObjectMask mask;
    SceneParams params;
};

/// Throws InvalidArgument when the parameters cannot produce a valid sample.
void validate(const SceneParams& p);
ProjectedRect project_vehicle(const SceneParams& p);

/// Analytic road depth for image row `y` (sky rows and far rows clamp to max_depth).
double road_depth(const SceneParams& p, int y);

SceneSample generate_scene(const SceneParams& p);

struct ParamRange {
    double lo = 0;
    double hi = 0;
};

/// Per-field ranges; unset fields keep the base value.
struct SceneVariation {
    std::optional<ParamRange> vehicle_distance;
    std::optional<ParamRange> vehicle_lateral_offset;
    std::optional<ParamRange> vehicle_width;
    std::optional<ParamRange> vehicle_height;
};

/// Parameters of sample `i` in a dataset. Drawn distances snap to the depth
/// PNG grid (1/256 m) so the stored vehicle depth round-trips exactly.
SceneParams dataset_sample_params(const SceneParams& base, const SceneVariation& variation,
                                  std::uint64_t master_seed, std::size_t i);

/// Checks every corner of the variation box against `validate`.
void validate(const SceneParams& base, const SceneVariation& variation);

struct DatasetOptions {
    Split split = Split::train;
    unsigned threads = 1;
};

/// Writes images/, depth/, masks/, index.txt and scenes.jsonl under `out`.
DatasetIndex generate_dataset(std::size_t n, const SceneParams& base, const SceneVariation& variation,
                              std::uint64_t master_seed, const std::filesystem::path& out,
                              const DatasetOptions& options = {});

}  // namespace depthpoison
