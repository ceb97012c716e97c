#include "depthpoison/trigger.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "depthpoison/error.hpp"
#include "depthpoison/io.hpp"
#include "depthpoison/rng.hpp"

namespace depthpoison {

TriggerPatch::TriggerPatch(int width, int height, std::array<double, 3> color) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw InvalidArgument("trigger patch must be at least 1x1");
    values_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = color[i % 3];
}

TriggerPatch TriggerPatch::from_raster(const RasterImage& image) {
    TriggerPatch t(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            for (int c = 0; c < 3; ++c) t.at(x, y, c) = image.at(x, y, c) / 255.0;
    return t;
}

RasterImage TriggerPatch::to_raster() const {
    RasterImage img(width_, height_);
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = clamp_to_byte(at(x, y, c) * 255.0);
    return img;
}

double spectral_radius(const Matrix3& m) {
    Eigen::Matrix3d g;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) g(r, c) = m[r][c];
    return Eigen::EigenSolver<Eigen::Matrix3d>(g, false).eigenvalues().cwiseAbs().maxCoeff();
}

void validate(const CameraColorModel& camera) {
    for (double s : camera.noise_sigma)
        if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("camera noise_sigma must be finite and >= 0");
    for (const auto& row : camera.gain)
        for (double v : row)
            if (!std::isfinite(v)) throw InvalidArgument("camera gain must be finite");
    if (camera.contraction_required) {
        const double rho = spectral_radius(camera.gain);
        if (!(rho < 1.0))
            throw InvalidArgument("camera gain spectral radius " + std::to_string(rho) +
                                  " is not < 1 but contraction_required is set");
    }
}

Vector3 affine_fixed_point(const CameraColorModel& camera) {
    Eigen::Matrix3d a = Eigen::Matrix3d::Identity();
    Eigen::Vector3d b;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) a(r, c) -= camera.gain[r][c];
        b(r) = camera.offset[r];
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
    if (!lu.isInvertible()) throw InvalidArgument("camera map has no unique fixed point (I - gain singular)");
    const Eigen::Vector3d x = lu.solve(b);
    return {x(0), x(1), x(2)};
}

TriggerPatch capture(const TriggerPatch& trigger, const CameraColorModel& camera, std::uint64_t round) {
    const bool noisy = camera.noise_sigma[0] > 0 || camera.noise_sigma[1] > 0 || camera.noise_sigma[2] > 0;
    Rng rng(derive_seed(camera.seed, round, SeedStream::camera));
    TriggerPatch out = trigger;
    for (int y = 0; y < trigger.height(); ++y) {
        for (int x = 0; x < trigger.width(); ++x) {
            for (int r = 0; r < 3; ++r) {
                double v = camera.offset[r];
                for (int c = 0; c < 3; ++c) v += camera.gain[r][c] * trigger.at(x, y, c);
                if (noisy) v += camera.noise_sigma[r] * rng.normal();
                out.at(x, y, r) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return out;
}

CalibrationResult calibrate_trigger(const TriggerPatch& initial, const CameraColorModel& camera, int iterations) {
    if (iterations < 0) throw InvalidArgument("calibration iterations must be >= 0");
    validate(camera);
    CalibrationResult result{initial, 0, 0.0};
    for (int i = 1; i <= iterations; ++i) {
        TriggerPatch next = capture(result.trigger, camera, static_cast<std::uint64_t>(i));
        double update = 0.0;
        for (std::size_t k = 0; k < next.values().size(); ++k)
            update = std::max(update, std::abs(next.values()[k] - result.trigger.values()[k]));
        result.trigger = std::move(next);
        result.iterations = i;
        result.final_update = update;
    }
    return result;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_numbers(const std::string& key, const std::string& value) {
    std::istringstream ss(value);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InvalidArgument("camera config: bad number '" + tok + "' for " + key);
        }
    }
    return out;
}

}  // namespace

CameraColorModel parse_camera_config(const std::string& text) {
    CameraColorModel cam;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("camera config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "gain") {
            const auto v = parse_numbers(key, value);
            if (v.size() != 9) throw InvalidArgument("camera config: gain needs 9 values");
            for (int i = 0; i < 9; ++i) cam.gain[i / 3][i % 3] = v[i];
        } else if (key == "offset") {
            const auto v = parse_numbers(key, value);
            if (v.size() != 3) throw InvalidArgument("camera config: offset needs 3 values");
            std::copy(v.begin(), v.end(), cam.offset.begin());
        } else if (key == "noise_sigma") {
            const auto v = parse_numbers(key, value);
            if (v.size() == 1) {
                cam.noise_sigma = {v[0], v[0], v[0]};
            } else if (v.size() == 3) {
                std::copy(v.begin(), v.end(), cam.noise_sigma.begin());
            } else {
                throw InvalidArgument("camera config: noise_sigma needs 1 or 3 values");
            }
        } else if (key == "seed") {
            std::uint64_t s = 0;
            const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
            if (ec != std::errc{} || p != value.data() + value.size())
                throw InvalidArgument("camera config: bad seed '" + value + "'");
            cam.seed = s;
        } else if (key == "contraction_required") {
            if (value == "true" || value == "1") {
                cam.contraction_required = true;
            } else if (value == "false" || value == "0") {
                cam.contraction_required = false;
            } else {
                throw InvalidArgument("camera config: contraction_required must be true or false");
            }
        } else {
            throw InvalidArgument("camera config: unknown key '" + key + "'");
        }
    }
    validate(cam);
    return cam;
}

CameraColorModel load_camera_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open camera config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_camera_config(ss.str());
}

std::string format_camera_config(const CameraColorModel& cam) {
    std::ostringstream out;
    out.precision(17);
    out << "gain =";
    for (const auto& row : cam.gain)
        for (double v : row) out << ' ' << v;
    out << "\noffset = " << cam.offset[0] << ' ' << cam.offset[1] << ' ' << cam.offset[2];
    out << "\nnoise_sigma = " << cam.noise_sigma[0] << ' ' << cam.noise_sigma[1] << ' ' << cam.noise_sigma[2];
    out << "\nseed = " << cam.seed;
    out << "\ncontraction_required = " << (cam.contraction_required ? "true" : "false") << "\n";
    return out.str();
}

TriggerPatch load_trigger_png(const std::filesystem::path& path) {
    return TriggerPatch::from_raster(io::read_image(path));
}

void save_trigger_png(const std::filesystem::path& path, const TriggerPatch& trigger) {
    io::write_image_png(path, trigger.to_raster());
}

// ---------------------------------------------------------------------------
// Placement

Footprint::Footprint(int x0, int y0, int width, int height)
    : x0_(x0), y0_(y0), width_(width), height_(height),
      cells_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), 0) {}

std::size_t Footprint::count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

namespace {

struct InverseMap {
    double cos_t, sin_t, scale, half_w, half_h, cx, cy;

    // Destination pixel center -> continuous source coordinate.
    std::array<double, 2> operator()(int x, int y) const {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        const double qx = cos_t * dx + sin_t * dy;
        const double qy = -sin_t * dx + cos_t * dy;
        return {qx / scale + half_w, qy / scale + half_h};
    }
};

InverseMap inverse_map(int pw, int ph, const TriggerPlacement& p, std::array<int, 2> extent) {
    const double rad = p.rotation_deg * std::numbers::pi / 180.0;
    return {std::cos(rad), std::sin(rad), p.scale, pw / 2.0, ph / 2.0,
            p.anchor_x + extent[0] / 2.0, p.anchor_y + extent[1] / 2.0};
}

}  // namespace

std::array<int, 2> transformed_extent(int width, int height, double rotation_deg, double scale) {
    if (!(scale > 0) || !std::isfinite(scale)) throw InvalidArgument("trigger scale must be positive");
    if (!std::isfinite(rotation_deg)) throw InvalidArgument("trigger rotation must be finite");
    const double rad = rotation_deg * std::numbers::pi / 180.0;
    const double c = std::abs(std::cos(rad));
    const double s = std::abs(std::sin(rad));
    const double bw = scale * (width * c + height * s);
    const double bh = scale * (width * s + height * c);
    // Tolerance absorbs cos(90 deg) != 0 in floating point.
    return {static_cast<int>(std::ceil(bw - 1e-9)), static_cast<int>(std::ceil(bh - 1e-9))};
}

Footprint trigger_footprint(int pw, int ph, const TriggerPlacement& p) {
    const auto extent = transformed_extent(pw, ph, p.rotation_deg, p.scale);
    Footprint fp(p.anchor_x, p.anchor_y, extent[0], extent[1]);
    const InverseMap inv = inverse_map(pw, ph, p, extent);
    for (int ly = 0; ly < extent[1]; ++ly) {
        for (int lx = 0; lx < extent[0]; ++lx) {
            const auto [u, v] = inv(p.anchor_x + lx, p.anchor_y + ly);
            if (u >= 0 && u < pw && v >= 0 && v < ph) fp.set(lx, ly);
        }
    }
    return fp;
}

void check_placement(int image_width, int image_height, const ObjectMask& mask, int pw, int ph,
                     const TriggerPlacement& p) {
    if (!mask.same_shape(image_width, image_height)) throw InvalidArgument("mask and image dimensions differ");
    const Footprint fp = trigger_footprint(pw, ph, p);
    if (fp.x0() < 0 || fp.y0() < 0 || fp.x0() + fp.width() > image_width || fp.y0() + fp.height() > image_height) {
        throw InvalidArgument("trigger footprint at (" + std::to_string(fp.x0()) + ", " + std::to_string(fp.y0()) +
                              ") size " + std::to_string(fp.width()) + "x" + std::to_string(fp.height()) +
                              " leaves the image");
    }
    if (fp.count() == 0) throw InvalidArgument("trigger footprint is empty");
    for (int y = fp.y0(); y < fp.y0() + fp.height(); ++y)
        for (int x = fp.x0(); x < fp.x0() + fp.width(); ++x)
            if (fp.contains(x, y) && mask.test(x, y)) return;
    throw InvalidArgument("trigger footprint does not touch the target object mask");
}

RasterImage place_trigger(const RasterImage& image, const ObjectMask& mask, const TriggerPatch& trigger,
                          const TriggerPlacement& p) {
    check_placement(image.width(), image.height(), mask, trigger.width(), trigger.height(), p);
    const auto extent = transformed_extent(trigger.width(), trigger.height(), p.rotation_deg, p.scale);
    const InverseMap inv = inverse_map(trigger.width(), trigger.height(), p, extent);
    const double gain = 255.0 * (1.0 + p.recolor_delta);
    const int pw = trigger.width();
    const int ph = trigger.height();

    RasterImage out = image;
    for (int ly = 0; ly < extent[1]; ++ly) {
        for (int lx = 0; lx < extent[0]; ++lx) {
            const int x = p.anchor_x + lx;
            const int y = p.anchor_y + ly;
            const auto [u, v] = inv(x, y);
            if (!(u >= 0 && u < pw && v >= 0 && v < ph)) continue;
            // Bilinear between source pixel centers, clamped at the patch edge.
            const double sx = u - 0.5;
            const double sy = v - 0.5;
            const int ix = static_cast<int>(std::floor(sx));
            const int iy = static_cast<int>(std::floor(sy));
            const double fx = sx - ix;
            const double fy = sy - iy;
            const int x0 = std::clamp(ix, 0, pw - 1), x1 = std::clamp(ix + 1, 0, pw - 1);
            const int y0 = std::clamp(iy, 0, ph - 1), y1 = std::clamp(iy + 1, 0, ph - 1);
            for (int c = 0; c < 3; ++c) {
                const double top = trigger.at(x0, y0, c) * (1 - fx) + trigger.at(x1, y0, c) * fx;
                const double bot = trigger.at(x0, y1, c) * (1 - fx) + trigger.at(x1, y1, c) * fx;
                out.at(x, y, c) = clamp_to_byte((top * (1 - fy) + bot * fy) * gain);
            }
        }
    }
    return out;
}

}  // namespace depthpoison
