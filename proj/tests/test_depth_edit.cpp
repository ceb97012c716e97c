#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "depthpoison/depth_edit.hpp"
#include "depthpoison/error.hpp"
#include "depthpoison/scenegen.hpp"
#include "test_support.hpp"

using namespace depthpoison;
using depthpoison::testing::rect_mask;

namespace {

// Thomas algorithm for u[i-1] - 2u[i] + u[i+1] = 0 with Dirichlet ends.
std::vector<double> tridiagonal_laplace(double left, double right, int n) {
    std::vector<double> a(n, 1.0), b(n, -2.0), c(n, 1.0), d(n, 0.0);
    d[0] -= left;
    d[n - 1] -= right;
    for (int i = 1; i < n; ++i) {
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    return x;
}

std::size_t brute_dilation_band(const ObjectMask& m, int r) {
    std::size_t n = 0;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            if (m.test(x, y)) continue;
            bool near = false;
            for (int dy = -r; dy <= r && !near; ++dy)
                for (int dx = -r; dx <= r && !near; ++dx)
                    near = m.contains(x + dx, y + dy) && m.test(x + dx, y + dy);
            n += near;
        }
    return n;
}

}  // namespace

TEST(CompletionRegion, RadiusZeroIsEmpty) {
    EXPECT_TRUE(compute_completion_region(rect_mask(20, 20, 5, 5, 4, 4), 0).bits.none());
}

TEST(CompletionRegion, SinglePixelRadiusOneIsEightNeighbourhood) {
    const auto r = compute_completion_region(rect_mask(9, 9, 4, 4, 1, 1), 1);
    EXPECT_EQ(r.bits.count(), 8u);
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) EXPECT_EQ(r.bits.test(4 + dx, 4 + dy), dx != 0 || dy != 0);
}

TEST(CompletionRegion, SquareMatchesBruteForceCount) {
    const ObjectMask m = rect_mask(40, 40, 15, 15, 10, 10);
    const auto r = compute_completion_region(m, 3);
    EXPECT_EQ(r.bits.count(), brute_dilation_band(m, 3));
    EXPECT_EQ(r.bits.count(), 156u);
}

TEST(CompletionRegion, RandomMasksMatchBruteForce) {
    std::mt19937 gen(3);
    for (int t = 0; t < 20; ++t) {
        ObjectMask m(23, 17);
        for (auto& b : m.data()) b = gen() % 11 == 0;
        const int radius = static_cast<int>(gen() % 4);
        const auto r = compute_completion_region(m, radius);
        EXPECT_EQ(r.bits.count(), brute_dilation_band(m, radius));
        for (std::size_t i = 0; i < m.size(); ++i) ASSERT_FALSE(m[i] && r.bits[i]);
    }
    EXPECT_THROW(compute_completion_region(ObjectMask(3, 3), -1), InvalidArgument);
}

TEST(Completion, OneDimensionalRampMatchesTridiagonalSolve) {
    DepthMap d(10, 1, 0.0);
    for (int x = 0; x < 10; ++x) d.at(x, 0) = 5.0 + x;
    d.at(2, 0) = 10.0;
    d.at(7, 0) = 20.0;
    ObjectMask region = rect_mask(10, 1, 3, 0, 4, 1);
    const auto res = complete_depth(d, region);
    const auto oracle = tridiagonal_laplace(10.0, 20.0, 4);
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(res.depth.at(3 + i, 0), oracle[i], 1e-3);
        EXPECT_NEAR(res.depth.at(3 + i, 0), 12.0 + 2.0 * i, 1e-3);
    }
    EXPECT_TRUE(res.stats.converged);
}

TEST(Completion, ConstantBoundaryGivesConstant) {
    DepthMap d(30, 20, 17.0);
    const ObjectMask region = rect_mask(30, 20, 8, 5, 12, 9);
    const auto res = complete_depth(d, region);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(res.depth[i], 17.0, 17.0 * 1e-4);
}

TEST(Completion, EmptyRegionIsNoOp) {
    DepthMap d(6, 4, 3.5);
    d.at(2, 2) = 0.0;
    const auto res = complete_depth(d, ObjectMask(6, 4));
    EXPECT_EQ(res.depth, d);
    EXPECT_EQ(res.stats.components, 0u);
}

TEST(Completion, ComponentWithoutBoundaryIsReported) {
    DepthMap d(12, 12, 0.0);  // nothing valid anywhere
    const ObjectMask region = rect_mask(12, 12, 2, 3, 2, 2);
    try {
        complete_depth(d, region);
        FAIL() << "expected CompletionError";
    } catch (const CompletionError& e) {
        EXPECT_EQ(e.seed_x(), 2);
        EXPECT_EQ(e.seed_y(), 3);
        EXPECT_EQ(e.pixels(), 4u);
    }
}

TEST(Completion, MaximumPrincipleOnRandomField) {
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> depth(2.0, 60.0);
    DepthMap d(40, 30);
    for (auto& v : d.data()) v = depth(gen);
    const ObjectMask mask = rect_mask(40, 30, 14, 10, 10, 8);
    const auto region = compute_completion_region(mask, 3);
    DepthMap work = d;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (mask[i]) work[i] = 0.0;
    double lo = 1e9, hi = -1e9;
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 40; ++x) {
            if (!region.bits.test(x, y)) continue;
            const int nx[4] = {x - 1, x + 1, x, x}, ny[4] = {y, y, y - 1, y + 1};
            for (int k = 0; k < 4; ++k)
                if (d.contains(nx[k], ny[k]) && !region.bits.test(nx[k], ny[k]) && work.at(nx[k], ny[k]) > 0) {
                    lo = std::min(lo, work.at(nx[k], ny[k]));
                    hi = std::max(hi, work.at(nx[k], ny[k]));
                }
        }
    const auto res = complete_depth(work, region.bits);
    for (std::size_t i = 0; i < d.size(); ++i)
        if (region.bits[i]) {
            EXPECT_GE(res.depth[i], lo);
            EXPECT_LE(res.depth[i], hi);
        }
}

TEST(TargetDepth, EmptyMaskAndRegionIsIdentity) {
    DepthMap d(8, 8, 4.0);
    const ObjectMask none(8, 8);
    const auto r = build_target_depth(d, none, compute_completion_region(none, 3));
    EXPECT_EQ(r.depth, d);
}

TEST(TargetDepth, ScenegenTrichotomyAndBoundaryExclusion) {
    SceneParams p;
    p.vehicle_distance = 10.0;
    const SceneSample s = generate_scene(p);
    const auto region = compute_completion_region(s.mask, 10);
    const auto r = build_target_depth(s.depth, s.mask, region);

    DepthMap work = s.depth;
    for (std::size_t i = 0; i < work.size(); ++i)
        if (s.mask[i]) work[i] = 0.0;
    const auto completed = complete_depth(work, region.bits);
    const auto report = check_trichotomy(s.depth, s.mask, region, completed.depth, r.depth);
    EXPECT_TRUE(report.ok()) << (report.details.empty() ? "" : report.details.front());
    EXPECT_EQ(report.removed, s.mask.count());
    EXPECT_EQ(report.completed, region.bits.count());
    EXPECT_EQ(report.removed + report.completed + report.kept, s.depth.size());

    // Object depths never leak into the completed band.
    DepthMap altered = s.depth;
    for (std::size_t i = 0; i < altered.size(); ++i)
        if (s.mask[i]) altered[i] = 3.0;
    EXPECT_EQ(build_target_depth(altered, s.mask, region).depth, r.depth);
}

TEST(TargetDepth, AlternativeFillAndOverlapRejected) {
    DepthMap d(20, 20, 9.0);
    const ObjectMask mask = rect_mask(20, 20, 8, 8, 3, 3);
    const auto region = compute_completion_region(mask, 2);
    const auto r = build_target_depth(d, mask, region, {}, 80.0);
    EXPECT_EQ(r.depth.at(9, 9), 80.0);
    CompletionRegion bad = region;
    bad.bits.at(9, 9) = 1;
    EXPECT_THROW(build_target_depth(d, mask, bad), InvalidArgument);
}

TEST(TargetDepth, TrichotomyCheckerFlagsTampering) {
    DepthMap d(20, 20, 9.0);
    const ObjectMask mask = rect_mask(20, 20, 8, 8, 3, 3);
    const auto region = compute_completion_region(mask, 2);
    DepthMap work = d;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (mask[i]) work[i] = 0;
    const auto completed = complete_depth(work, region.bits);
    DepthMap target = build_target_depth(d, mask, region).depth;
    target.at(9, 9) = 1.0 / 256.0;
    const auto rep = check_trichotomy(d, mask, region, completed.depth, target);
    EXPECT_EQ(rep.violations, 1u);
    EXPECT_FALSE(rep.ok());
}
