#include "depthpoison/scenegen.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "depthpoison/error.hpp"
#include "depthpoison/io.hpp"
#include "depthpoison/parallel.hpp"
#include "depthpoison/rng.hpp"

namespace depthpoison {

namespace {

double center_x(const SceneParams& p) { return p.image_width / 2.0; }
double center_y(const SceneParams& p) { return p.image_height / 2.0; }

struct Rgb {
    double r, g, b;
};

void put(RasterImage& img, int x, int y, Rgb c, double noise) {
    img.at(x, y, 0) = clamp_to_byte(c.r + noise);
    img.at(x, y, 1) = clamp_to_byte(c.g + noise);
    img.at(x, y, 2) = clamp_to_byte(c.b + noise);
}

nlohmann::json to_json(const SceneParams& p) {
    return {{"image_width", p.image_width},
            {"image_height", p.image_height},
            {"vehicle_distance", p.vehicle_distance},
            {"vehicle_width", p.vehicle_width},
            {"vehicle_height", p.vehicle_height},
            {"vehicle_lateral_offset", p.vehicle_lateral_offset},
            {"focal_length", p.focal_length},
            {"camera_height", p.camera_height},
            {"max_depth", p.max_depth},
            {"seed", p.seed}};
}

}  // namespace

void validate(const SceneParams& p) {
    auto fail = [](const std::string& why) { throw InvalidArgument("scene: " + why); };
    if (p.image_width <= 0 || p.image_height <= 0) fail("image dimensions must be positive");
    if (!(p.focal_length > 0)) fail("focal_length must be positive");
    if (!(p.camera_height > 0)) fail("camera_height must be positive");
    if (!(p.vehicle_width > 0) || !(p.vehicle_height > 0)) fail("vehicle dimensions must be positive");
    if (!(p.max_depth > 0) || p.max_depth > io::kMaxEncodableDepth)
        fail("max_depth must be in (0, 255.996] m");
    if (!(p.vehicle_distance > 0)) fail("vehicle_distance must be positive");
    if (!(p.vehicle_distance < p.max_depth)) fail("vehicle_distance must be below max_depth");
    if (!std::isfinite(p.vehicle_lateral_offset)) fail("vehicle_lateral_offset must be finite");

    const ProjectedRect r = project_vehicle(p);
    if (r.left < 0 || r.top < 0 || r.right > p.image_width || r.bottom > p.image_height) {
        std::ostringstream ss;
        ss << "projected vehicle [" << r.left << ", " << r.right << ") x [" << r.top << ", " << r.bottom
           << ") leaves the " << p.image_width << "x" << p.image_height << " frame";
        fail(ss.str());
    }
    // Pixel-center rule must select at least one pixel.
    if (std::ceil(r.right - 0.5) - std::ceil(r.left - 0.5) < 1 || std::ceil(r.bottom - 0.5) - std::ceil(r.top - 0.5) < 1)
        fail("projected vehicle covers no pixel center");
}

ProjectedRect project_vehicle(const SceneParams& p) {
    const double f_over_z = p.focal_length / p.vehicle_distance;
    const double cx = center_x(p);
    const double cy = center_y(p);
    ProjectedRect r;
    r.left = cx + f_over_z * (p.vehicle_lateral_offset - p.vehicle_width / 2.0);
    r.right = cx + f_over_z * (p.vehicle_lateral_offset + p.vehicle_width / 2.0);
    r.bottom = cy + f_over_z * p.camera_height;
    r.top = cy + f_over_z * (p.camera_height - p.vehicle_height);
    return r;
}

double road_depth(const SceneParams& p, int y) {
    const double below_horizon = (y + 0.5) - center_y(p);
    if (below_horizon <= 0) return p.max_depth;
    return std::min(p.max_depth, p.focal_length * p.camera_height / below_horizon);
}

SceneSample generate_scene(const SceneParams& p) {
    validate(p);
    const int w = p.image_width;
    const int h = p.image_height;
    SceneSample s{RasterImage(w, h), DepthMap(w, h), ObjectMask(w, h), p};

    const ProjectedRect r = project_vehicle(p);
    Rng rng(p.seed);
    // Body colour is cosmetic and seed-driven.
    const Rgb body{60 + 150 * rng.uniform(), 40 + 120 * rng.uniform(), 40 + 150 * rng.uniform()};
    const double cx = center_x(p);

    for (int y = 0; y < h; ++y) {
        const double depth = road_depth(p, y);
        const bool sky = (y + 0.5) <= center_y(p);
        for (int x = 0; x < w; ++x) {
            const double px = x + 0.5;
            const double py = y + 0.5;
            const bool on_vehicle = px >= r.left && px < r.right && py >= r.top && py < r.bottom;
            const double noise = 6.0 * (rng.uniform() - 0.5);
            if (on_vehicle) {
                s.mask.at(x, y) = 1;
                s.depth.at(x, y) = p.vehicle_distance;
                const double u = (px - r.left) / (r.right - r.left);
                const double v = (py - r.top) / (r.bottom - r.top);
                if (v < 0.35 && u > 0.1 && u < 0.9) {
                    put(s.image, x, y, {35, 45, 55}, noise);  // rear window
                } else if (v > 0.55 && v < 0.7 && (u < 0.15 || u > 0.85)) {
                    put(s.image, x, y, {200, 30, 25}, noise);  // tail lights
                } else {
                    put(s.image, x, y, body, noise);
                }
                continue;
            }
            s.depth.at(x, y) = depth;
            if (sky) {
                const double t = py / center_y(p);
                put(s.image, x, y, {110 + 60 * t, 150 + 50 * t, 230 - 10 * t}, noise);
                continue;
            }
            // Lateral road coordinate of this pixel on the ground plane.
            const double lateral = (px - cx) * depth / p.focal_length;
            const double a = std::abs(lateral);
            if (a > 6.0) {
                put(s.image, x, y, {70, 120, 55}, 2 * noise);
            } else if (std::abs(a - 1.8) < 0.08 && static_cast<long>(std::floor(depth / 3.0)) % 2 == 0) {
                put(s.image, x, y, {225, 225, 215}, noise);
            } else {
                put(s.image, x, y, {100, 100, 104}, 2 * noise);
            }
        }
    }
    return s;
}

void validate(const SceneParams& base, const SceneVariation& v) {
    auto check = [](const std::optional<ParamRange>& r, const char* name) {
        if (r && !(r->lo <= r->hi)) throw InvalidArgument(std::string("invalid range for ") + name);
    };
    check(v.vehicle_distance, "vehicle_distance");
    check(v.vehicle_lateral_offset, "vehicle_lateral_offset");
    check(v.vehicle_width, "vehicle_width");
    check(v.vehicle_height, "vehicle_height");

    auto pick = [](const std::optional<ParamRange>& r, double fallback, int bit) {
        if (!r) return fallback;
        return bit ? r->hi : r->lo;
    };
    // The projected edges are monotone in each parameter, so the corners bound every draw.
    for (int corner = 0; corner < 16; ++corner) {
        SceneParams p = base;
        p.vehicle_distance = pick(v.vehicle_distance, base.vehicle_distance, corner & 1);
        p.vehicle_lateral_offset = pick(v.vehicle_lateral_offset, base.vehicle_lateral_offset, corner & 2);
        p.vehicle_width = pick(v.vehicle_width, base.vehicle_width, corner & 4);
        p.vehicle_height = pick(v.vehicle_height, base.vehicle_height, corner & 8);
        try {
            validate(p);
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(std::string("variation range admits an invalid scene: ") + e.what());
        }
    }
}

SceneParams dataset_sample_params(const SceneParams& base, const SceneVariation& v, std::uint64_t master_seed,
                                  std::size_t i) {
    SceneParams p = base;
    p.seed = derive_seed(master_seed, i, SeedStream::scene);
    Rng rng(derive_seed(p.seed, 0, SeedStream::scene));
    auto draw = [&rng](const std::optional<ParamRange>& r, double fallback) {
        return r ? rng.uniform(r->lo, r->hi) : fallback;
    };
    p.vehicle_distance = draw(v.vehicle_distance, base.vehicle_distance);
    p.vehicle_lateral_offset = draw(v.vehicle_lateral_offset, base.vehicle_lateral_offset);
    p.vehicle_width = draw(v.vehicle_width, base.vehicle_width);
    p.vehicle_height = draw(v.vehicle_height, base.vehicle_height);

    // Snap inward so the snapped distance stays inside the drawn range.
    const double lo = v.vehicle_distance ? v.vehicle_distance->lo : p.vehicle_distance;
    const double hi = v.vehicle_distance ? v.vehicle_distance->hi : p.vehicle_distance;
    double snapped = io::quantize_depth(p.vehicle_distance);
    if (snapped > hi) snapped -= 1.0 / io::kDepthScale;
    if (snapped < lo) snapped += 1.0 / io::kDepthScale;
    if (snapped >= lo && snapped <= hi) p.vehicle_distance = snapped;
    return p;
}

DatasetIndex generate_dataset(std::size_t n, const SceneParams& base, const SceneVariation& variation,
                              std::uint64_t master_seed, const std::filesystem::path& out,
                              const DatasetOptions& options) {
    if (n == 0) throw InvalidArgument("dataset size must be >= 1");
    validate(base, variation);

    DatasetIndex index;
    index.root = out;
    index.split = options.split;
    index.samples.resize(n);
    std::vector<std::string> param_lines(n);

    std::filesystem::create_directories(out);
    parallel_for(n, options.threads, [&](std::size_t i) {
        const SceneParams p = dataset_sample_params(base, variation, master_seed, i);
        const SceneSample s = generate_scene(p);
        const SampleEntry e = standard_entry(i);
        io::write_image_png(out / e.image, s.image);
        io::write_depth_png(out / e.depth, s.depth);
        io::write_mask_png(out / *e.mask, s.mask);
        nlohmann::json j = to_json(p);
        j = {{"sample_id", e.id}, {"params", j}};
        param_lines[i] = j.dump();
        index.samples[i] = e;
    });

    std::string scenes;
    for (const auto& l : param_lines) scenes += l + "\n";
    io::write_text(out / "scenes.jsonl", scenes);
    write_index(index);
    return index;
}

}  // namespace depthpoison
