#include <gtest/gtest.h>

#include <cmath>

#include "depthpoison/augment.hpp"
#include "depthpoison/error.hpp"
#include "depthpoison/scenegen.hpp"
#include "test_support.hpp"

using namespace depthpoison;
using depthpoison::testing::gradient_image;
using depthpoison::testing::rect_mask;

TEST(Perspective, ZeroRangesFixedEqualsBarePlacement) {
    const SceneSample s = generate_scene(SceneParams{});
    AugmentParams a;
    a.theta_max = 0;
    a.recolor_fraction = 0;
    a.size_delta = 0;
    a.position_mode = PositionMode::fixed;
    a.seed = 3;
    const TriggerPatch t = TriggerPatch::white(40);
    const auto r = perspective_augment(s.image, s.mask, t, a);
    const TriggerPlacement p = centred_placement(s.mask, 40, 40);
    EXPECT_EQ(r.placement, p);
    EXPECT_EQ(r.image, place_trigger(s.image, s.mask, t, p));
    EXPECT_EQ(r.draw.shift_x, 0);
    EXPECT_EQ(r.draw.shift_y, 0);
}

TEST(Perspective, DrawsStayInRangeAndAreDeterministic) {
    const SceneSample s = generate_scene(SceneParams{});
    const TriggerPatch t = TriggerPatch::white(40);
    double min_t = 1e9, max_t = -1e9;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        AugmentParams a;
        a.seed = seed;
        const auto r = perspective_augment(s.image, s.mask, t, a);
        EXPECT_GE(r.draw.rotation_deg, 0.0);
        EXPECT_LE(r.draw.rotation_deg, 60.0);
        EXPECT_LE(std::abs(r.draw.recolor_delta), 0.10);
        EXPECT_LE(std::abs(r.draw.size_delta_px), 10.0);
        EXPECT_DOUBLE_EQ(r.draw.scale, (40 + r.draw.size_delta_px) / 40.0);
        min_t = std::min(min_t, r.draw.rotation_deg);
        max_t = std::max(max_t, r.draw.rotation_deg);
        if (seed < 5) {
            const auto again = perspective_augment(s.image, s.mask, t, a);
            EXPECT_EQ(again.image, r.image);
            EXPECT_EQ(again.placement, r.placement);
        }
    }
    EXPECT_LT(min_t, 10.0);
    EXPECT_GT(max_t, 50.0);
}

TEST(Perspective, SymmetricRotationCoversNegativeAngles) {
    const SceneSample s = generate_scene(SceneParams{});
    bool negative = false;
    for (std::uint64_t seed = 0; seed < 50 && !negative; ++seed) {
        AugmentParams a;
        a.seed = seed;
        a.symmetric_rotation = true;
        negative = perspective_augment(s.image, s.mask, TriggerPatch::white(40), a).draw.rotation_deg < 0;
    }
    EXPECT_TRUE(negative);
}

TEST(Perspective, ImpossiblePlacementFails) {
    const ObjectMask mask = rect_mask(30, 30, 0, 0, 30, 30);
    AugmentParams a;
    EXPECT_THROW(perspective_augment(RasterImage(30, 30), mask, TriggerPatch::white(40), a), PlacementError);
    a.position_mode = PositionMode::fixed;
    EXPECT_THROW(perspective_augment(RasterImage(30, 30), mask, TriggerPatch::white(40), a), PlacementError);
    a.size_delta = 0;
    EXPECT_THROW(perspective_augment(RasterImage(30, 30), ObjectMask(30, 30), TriggerPatch::white(4), a),
                 PlacementError);
}

TEST(Weather, DeterministicAndShapePreserving) {
    const RasterImage img = gradient_image(96, 64);
    for (Weather k : {Weather::fog, Weather::snow, Weather::frost}) {
        const WeatherKind w{k, 3, 17};
        const RasterImage a = environment_augment(img, w), b = environment_augment(img, w);
        EXPECT_EQ(a, b) << to_string(k);
        EXPECT_TRUE(a.same_shape(img));
        EXPECT_NE(a, img);
        EXPECT_NE(environment_augment(img, {k, 3, 18}), a);
    }
}

TEST(Weather, SeverityMonotoneInMeanChange) {
    const RasterImage img = gradient_image(128, 96);
    for (Weather k : {Weather::fog, Weather::snow, Weather::frost}) {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            double prev = 0.0;
            for (int sev = 1; sev <= 5; ++sev) {
                const double change = mean_abs_diff(environment_augment(img, {k, sev, seed}), img);
                EXPECT_GE(change, prev) << to_string(k) << " severity " << sev;
                prev = change;
            }
        }
    }
}

TEST(Weather, FogOnFogColourIsFixed) {
    RasterImage img(40, 30);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 40; ++x) {
            img.at(x, y, 0) = 205;
            img.at(x, y, 1) = 208;
            img.at(x, y, 2) = 212;
        }
    const RasterImage out = environment_augment(img, {Weather::fog, 5, 9});
    for (std::size_t i = 0; i < out.data().size(); ++i) EXPECT_LE(std::abs(out.data()[i] - img.data()[i]), 1);
}

TEST(Weather, InvalidSeverityRejected) {
    EXPECT_THROW(environment_augment(RasterImage(4, 4), {Weather::snow, 0, 1}), InvalidArgument);
    EXPECT_THROW(environment_augment(RasterImage(4, 4), {Weather::snow, 6, 1}), InvalidArgument);
    EXPECT_THROW(parse_weather("rain"), InvalidArgument);
}

TEST(Weather, PlasmaInUnitRange) {
    const auto g = plasma_field(50, 20, 4);
    for (double v : g.data()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Compress, HighQualityGradientAbove40dB) {
    RasterImage img(128, 96);
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 128; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>((x + y + 40 * c) / 2);
    EXPECT_GT(psnr(compress(img, 100), img), 40.0);
}

TEST(Compress, Quality60KeepsDimensionsAndIsStable) {
    const SceneSample s = generate_scene(SceneParams{});
    const RasterImage once = compress(s.image, 60);
    EXPECT_TRUE(once.same_shape(s.image));
    const RasterImage twice = compress(once, 60);
    EXPECT_LT(std::abs(psnr(twice, s.image) - psnr(once, s.image)), 1.0);
    EXPECT_THROW(compress(s.image, 0), InvalidArgument);
    EXPECT_THROW(compress(s.image, 101), InvalidArgument);
}

TEST(Compress, PsnrOfIdenticalIsInfinite) {
    const RasterImage img = gradient_image(8, 8);
    EXPECT_TRUE(std::isinf(psnr(img, img)));
}
