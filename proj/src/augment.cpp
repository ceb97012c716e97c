#include "depthpoison/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "depthpoison/io.hpp"
#include "depthpoison/rng.hpp"

namespace depthpoison {

std::string_view to_string(PositionMode m) {
    return m == PositionMode::fixed ? "fixed" : "uniform-within-mask";
}

PositionMode parse_position_mode(std::string_view s) {
    if (s == "fixed") return PositionMode::fixed;
    if (s == "uniform-within-mask" || s == "uniform") return PositionMode::uniform_within_mask;
    throw InvalidArgument("unknown position mode '" + std::string(s) + "'");
}

std::string_view to_string(Weather w) {
    switch (w) {
        case Weather::fog: return "fog";
        case Weather::snow: return "snow";
        case Weather::frost: return "frost";
    }
    return "?";
}

Weather parse_weather(std::string_view s) {
    if (s == "fog") return Weather::fog;
    if (s == "snow") return Weather::snow;
    if (s == "frost") return Weather::frost;
    throw InvalidArgument("unknown weather '" + std::string(s) + "' (fog, snow, frost)");
}

void validate(const AugmentParams& p) {
    if (!(p.theta_max >= 0) || !std::isfinite(p.theta_max)) throw InvalidArgument("theta_max must be >= 0");
    if (!(p.recolor_fraction >= 0) || p.recolor_fraction >= 1) throw InvalidArgument("recolor_fraction must be in [0, 1)");
    if (!(p.size_delta >= 0) || !std::isfinite(p.size_delta)) throw InvalidArgument("size_delta must be >= 0");
    if (p.max_retries < 1) throw InvalidArgument("max_retries must be >= 1");
}

TriggerPlacement centred_placement(const ObjectMask& mask, int pw, int ph, double rotation_deg, double scale,
                                   double recolor_delta) {
    int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.test(x, y)) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
    if (x1 < 0) throw PlacementError("cannot centre a trigger on an empty mask");
    const auto ext = transformed_extent(pw, ph, rotation_deg, scale);
    TriggerPlacement p;
    // Integer arithmetic keeps the anchor exact: centre is (x0 + x1 + 1) / 2.
    p.anchor_x = static_cast<int>(std::floor((x0 + x1 + 1 - ext[0]) / 2.0));
    p.anchor_y = static_cast<int>(std::floor((y0 + y1 + 1 - ext[1]) / 2.0));
    p.rotation_deg = rotation_deg;
    p.scale = scale;
    p.recolor_delta = recolor_delta;
    return p;
}

namespace {

bool placement_ok(const RasterImage& image, const ObjectMask& mask, const TriggerPatch& t, const TriggerPlacement& p) {
    try {
        check_placement(image.width(), image.height(), mask, t.width(), t.height(), p);
        return true;
    } catch (const InvalidArgument&) {
        return false;
    }
}

}  // namespace

PerspectiveResult perspective_augment(const RasterImage& image, const ObjectMask& mask, const TriggerPatch& trigger,
                                      const AugmentParams& params) {
    validate(params);
    if (!mask.same_shape(image.width(), image.height())) throw InvalidArgument("mask and image dimensions differ");

    Rng rng(params.seed);
    PerspectiveDraw d;
    const double theta_lo = params.symmetric_rotation ? -params.theta_max : 0.0;
    d.rotation_deg = rng.uniform(theta_lo, params.theta_max);
    d.recolor_delta = rng.uniform(-params.recolor_fraction, params.recolor_fraction);
    d.size_delta_px = rng.uniform(-params.size_delta, params.size_delta);
    d.scale = (trigger.width() + d.size_delta_px) / trigger.width();
    if (!(d.scale > 0)) throw InvalidArgument("size_delta shrinks the trigger to nothing");

    // Rotate, recolor, scale, translate. The recolor is a scalar gain, so it
    // commutes with the resampling and is applied per output pixel.
    const TriggerPlacement centred =
        centred_placement(mask, trigger.width(), trigger.height(), d.rotation_deg, d.scale, d.recolor_delta);
    TriggerPlacement chosen = centred;

    if (params.position_mode == PositionMode::fixed) {
        d.attempts = 1;
        if (!placement_ok(image, mask, trigger, chosen))
            throw PlacementError("fixed trigger placement does not fit on the object");
    } else {
        std::vector<std::size_t> on_mask;
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) on_mask.push_back(i);
        const auto ext = transformed_extent(trigger.width(), trigger.height(), d.rotation_deg, d.scale);
        bool found = false;
        for (int attempt = 1; attempt <= params.max_retries && !found; ++attempt) {
            d.attempts = attempt;
            const std::size_t pick = on_mask[rng.below(on_mask.size())];
            const int mx = static_cast<int>(pick % static_cast<std::size_t>(mask.width()));
            const int my = static_cast<int>(pick / static_cast<std::size_t>(mask.width()));
            chosen.anchor_x = mx - ext[0] / 2;
            chosen.anchor_y = my - ext[1] / 2;
            found = placement_ok(image, mask, trigger, chosen);
        }
        if (!found)
            throw PlacementError("no on-object trigger placement after " + std::to_string(params.max_retries) +
                                 " attempts");
    }
    d.shift_x = chosen.anchor_x - centred.anchor_x;
    d.shift_y = chosen.anchor_y - centred.anchor_y;
    return {place_trigger(image, mask, trigger, chosen), chosen, d};
}

// ---------------------------------------------------------------------------
// Weather

Grid<double> plasma_field(int width, int height, std::uint64_t seed, double roughness) {
    int n = 1;
    while (n + 1 < std::max(width, height)) n *= 2;
    const int size = n + 1;
    Grid<double> g(size, size);
    Rng rng(seed);
    g.at(0, 0) = rng.uniform();
    g.at(n, 0) = rng.uniform();
    g.at(0, n) = rng.uniform();
    g.at(n, n) = rng.uniform();
    double amp = 1.0;
    for (int step = n; step > 1; step /= 2) {
        const int half = step / 2;
        for (int y = half; y < n; y += step)
            for (int x = half; x < n; x += step) {
                const double avg = (g.at(x - half, y - half) + g.at(x + half, y - half) + g.at(x - half, y + half) +
                                    g.at(x + half, y + half)) / 4.0;
                g.at(x, y) = avg + amp * (rng.uniform() - 0.5);
            }
        for (int y = 0; y <= n; y += half)
            for (int x = ((y / half) % 2 == 0) ? half : 0; x <= n; x += step) {
                double s = 0.0;
                int k = 0;
                if (x - half >= 0) s += g.at(x - half, y), ++k;
                if (x + half <= n) s += g.at(x + half, y), ++k;
                if (y - half >= 0) s += g.at(x, y - half), ++k;
                if (y + half <= n) s += g.at(x, y + half), ++k;
                g.at(x, y) = s / k + amp * (rng.uniform() - 0.5);
            }
        amp *= roughness;
    }
    Grid<double> out(width, height);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            out.at(x, y) = g.at(x, y);
            lo = std::min(lo, g.at(x, y));
            hi = std::max(hi, g.at(x, y));
        }
    const double span = hi > lo ? hi - lo : 1.0;
    for (auto& v : out.data()) v = (v - lo) / span;
    return out;
}

namespace {

using Rgb = std::array<double, 3>;

void check_severity(int severity) {
    if (severity < 1 || severity > 5) throw InvalidArgument("weather severity must be in 1..5");
}

RasterImage blend_toward(const RasterImage& in, const Grid<double>& alpha, const Rgb& colour) {
    RasterImage out(in.width(), in.height());
    for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < in.width(); ++x) {
            const double a = alpha.at(x, y);
            for (int c = 0; c < 3; ++c) {
                const double v = in.at(x, y, c);
                out.at(x, y, c) = clamp_to_byte(v + a * (colour[c] - v));
            }
        }
    return out;
}

RasterImage fog(const RasterImage& in, int severity, std::uint64_t seed) {
    static constexpr std::array<double, 5> kStrength{0.25, 0.40, 0.55, 0.70, 0.85};
    static constexpr Rgb kFog{205, 208, 212};
    const Grid<double> plasma = plasma_field(in.width(), in.height(), seed);
    Grid<double> alpha(in.width(), in.height());
    const double s = kStrength[severity - 1];
    for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = s * (0.35 + 0.65 * plasma[i]);
    return blend_toward(in, alpha, kFog);
}

void splat_add(Grid<double>& layer, double x, double y, double v) {
    const int ix = static_cast<int>(std::floor(x));
    const int iy = static_cast<int>(std::floor(y));
    if (layer.contains(ix, iy)) layer.at(ix, iy) = std::min(1.0, layer.at(ix, iy) + v);
}

RasterImage snow(const RasterImage& in, int severity, std::uint64_t seed) {
    static constexpr std::array<double, 5> kDensity{0.0015, 0.0030, 0.0045, 0.0060, 0.0075};
    static constexpr std::array<double, 5> kLength{4, 6, 8, 10, 12};
    static constexpr std::array<double, 5> kWhiten{0.05, 0.10, 0.15, 0.20, 0.25};
    static constexpr std::array<double, 5> kOpacity{0.60, 0.70, 0.80, 0.90, 1.00};
    const int w = in.width();
    const int h = in.height();
    const std::size_t area = static_cast<std::size_t>(w) * h;

    // Severity k uses a prefix of one particle stream, so the layer only grows with k.
    Rng rng(seed);
    const double angle = (90.0 + rng.uniform(-25.0, 25.0)) * std::numbers::pi / 180.0;
    const double ux = std::cos(angle), uy = std::sin(angle);
    const auto total = static_cast<std::size_t>(std::llround(kDensity.back() * static_cast<double>(area)));
    const auto used = static_cast<std::size_t>(std::llround(kDensity[severity - 1] * static_cast<double>(area)));
    const double length = kLength[severity - 1];

    Grid<double> layer(w, h);
    for (std::size_t p = 0; p < total; ++p) {
        const double px = rng.uniform(0, w);
        const double py = rng.uniform(0, h);
        const double bright = rng.uniform(0.5, 1.0);
        if (p >= used) continue;
        for (double t = 0; t <= length; t += 0.5) {
            const double v = bright * (1.0 - t / (length + 1.0));
            splat_add(layer, px + ux * t, py + uy * t, v);
            splat_add(layer, px + ux * t + 1, py + uy * t, 0.5 * v);
        }
    }

    const double whiten = kWhiten[severity - 1];
    const double opacity = kOpacity[severity - 1];
    RasterImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double s = layer.at(x, y) * opacity;
            for (int c = 0; c < 3; ++c) {
                double v = in.at(x, y, c);
                v += whiten * (255.0 - v);
                v += s * (255.0 - v);
                out.at(x, y, c) = clamp_to_byte(v);
            }
        }
    return out;
}

void stroke_max(Grid<double>& layer, double x0, double y0, double x1, double y1, double v) {
    const double len = std::hypot(x1 - x0, y1 - y0);
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 2)));
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        const int x = static_cast<int>(std::floor(x0 + t * (x1 - x0)));
        const int y = static_cast<int>(std::floor(y0 + t * (y1 - y0)));
        if (layer.contains(x, y)) layer.at(x, y) = std::max(layer.at(x, y), v * (1.0 - 0.5 * t));
    }
}

Grid<double> frost_layer(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    Grid<double> crystal(w, h);
    const int crystals = std::max(3, (w * h) / 3000);
    const double reach = 0.08 * std::min(w, h) + 4.0;
    for (int k = 0; k < crystals; ++k) {
        const double cx = rng.uniform(0, w), cy = rng.uniform(0, h);
        const double rot = rng.uniform(0, std::numbers::pi / 3);
        const double arm = reach * rng.uniform(0.5, 1.0);
        const double bright = rng.uniform(0.6, 1.0);
        for (int a = 0; a < 6; ++a) {
            const double th = rot + a * std::numbers::pi / 3;
            const double ex = cx + arm * std::cos(th), ey = cy + arm * std::sin(th);
            stroke_max(crystal, cx, cy, ex, ey, bright);
            for (double f : {0.35, 0.6, 0.8}) {
                const double bx = cx + f * arm * std::cos(th), by = cy + f * arm * std::sin(th);
                const double side = (1.0 - f) * arm * 0.6;
                for (double turn : {-std::numbers::pi / 3, std::numbers::pi / 3})
                    stroke_max(crystal, bx, by, bx + side * std::cos(th + turn), by + side * std::sin(th + turn),
                               0.8 * bright);
            }
        }
    }
    // Coarse value noise on a 4 px lattice, bilinearly interpolated.
    const int gw = w / 4 + 2, gh = h / 4 + 2;
    Grid<double> lattice(gw, gh);
    for (auto& v : lattice.data()) v = rng.uniform();
    Grid<double> layer(w, h);
    const double cxm = w / 2.0, cym = h / 2.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double gx = x / 4.0, gy = y / 4.0;
            const int ix = static_cast<int>(gx), iy = static_cast<int>(gy);
            const double fx = gx - ix, fy = gy - iy;
            const double n = (lattice.at(ix, iy) * (1 - fx) + lattice.at(ix + 1, iy) * fx) * (1 - fy) +
                             (lattice.at(ix, iy + 1) * (1 - fx) + lattice.at(ix + 1, iy + 1) * fx) * fy;
            // Frost gathers toward the frame edges.
            const double edge = std::min(1.0, std::hypot((x - cxm) / cxm, (y - cym) / cym) / std::numbers::sqrt2);
            layer.at(x, y) = std::clamp(0.75 * crystal.at(x, y) + 0.35 * n * (0.4 + 0.6 * edge), 0.0, 1.0);
        }
    return layer;
}

RasterImage frost(const RasterImage& in, int severity, std::uint64_t seed) {
    static constexpr std::array<double, 5> kOpacity{0.20, 0.32, 0.44, 0.56, 0.68};
    static constexpr Rgb kIce{215, 230, 245};
    Grid<double> alpha = frost_layer(in.width(), in.height(), seed);
    for (auto& a : alpha.data()) a *= kOpacity[severity - 1];
    return blend_toward(in, alpha, kIce);
}

}  // namespace

RasterImage environment_augment(const RasterImage& image, const WeatherKind& weather) {
    check_severity(weather.severity);
    if (image.empty()) return image;
    switch (weather.kind) {
        case Weather::fog: return fog(image, weather.severity, weather.seed);
        case Weather::snow: return snow(image, weather.severity, weather.seed);
        case Weather::frost: return frost(image, weather.severity, weather.seed);
    }
    throw InvalidArgument("unknown weather kind");
}

RasterImage compress(const RasterImage& image, int quality) {
    const auto bytes = io::encode_jpeg(image, quality);
    RasterImage out = io::decode_image(bytes);
    if (out.width() != image.width() || out.height() != image.height())
        throw IoError("JPEG round trip changed the image dimensions");
    return out;
}

double psnr(const RasterImage& a, const RasterImage& b) {
    if (a.width() != b.width() || a.height() != b.height()) throw InvalidArgument("psnr: dimensions differ");
    double se = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double d = static_cast<double>(a.data()[i]) - b.data()[i];
        se += d * d;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = se / static_cast<double>(a.data().size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double mean_abs_diff(const RasterImage& a, const RasterImage& b) {
    if (a.width() != b.width() || a.height() != b.height()) throw InvalidArgument("mean_abs_diff: dimensions differ");
    if (a.data().empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) s += std::abs(static_cast<double>(a.data()[i]) - b.data()[i]);
    return s / static_cast<double>(a.data().size());
}

}  // namespace depthpoison
