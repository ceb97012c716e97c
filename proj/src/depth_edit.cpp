#include "depthpoison/depth_edit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace depthpoison {

CompletionError::CompletionError(int seed_x, int seed_y, std::size_t pixels)
    : Error("completion region component at (" + std::to_string(seed_x) + ", " + std::to_string(seed_y) + "), " +
            std::to_string(pixels) + " px, has no valid boundary depth"),
      seed_x_(seed_x), seed_y_(seed_y), pixels_(pixels) {}

CompletionRegion compute_completion_region(const ObjectMask& mask, int radius) {
    if (radius < 0) throw InvalidArgument("completion radius must be >= 0");
    const int w = mask.width();
    const int h = mask.height();
    // Separable max filter: horizontal pass, then vertical.
    ObjectMask horiz(w, h);
    for (int y = 0; y < h; ++y) {
        int last = std::numeric_limits<int>::min() / 2;  // x of the most recent set pixel to the left
        std::vector<int> next_right(w + 1, std::numeric_limits<int>::max() / 2);
        for (int x = w - 1; x >= 0; --x) next_right[x] = mask.test(x, y) ? x : next_right[x + 1];
        for (int x = 0; x < w; ++x) {
            if (mask.test(x, y)) last = x;
            horiz.at(x, y) = (x - last <= radius || next_right[x] - x <= radius) ? 1 : 0;
        }
    }
    CompletionRegion region{ObjectMask(w, h), radius};
    for (int x = 0; x < w; ++x) {
        int last = std::numeric_limits<int>::min() / 2;
        std::vector<int> next_down(h + 1, std::numeric_limits<int>::max() / 2);
        for (int y = h - 1; y >= 0; --y) next_down[y] = horiz.test(x, y) ? y : next_down[y + 1];
        for (int y = 0; y < h; ++y) {
            if (horiz.test(x, y)) last = y;
            const bool dilated = y - last <= radius || next_down[y] - y <= radius;
            region.bits.at(x, y) = (dilated && !mask.test(x, y)) ? 1 : 0;
        }
    }
    return region;
}

namespace {

struct Node {
    std::size_t index;
    std::array<std::size_t, 4> neighbours;
    int count;
    std::size_t component;
};

struct Component {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    std::size_t boundary = 0;
    std::size_t pixels = 0;
    int seed_x = 0, seed_y = 0;
};

}  // namespace

CompletionResult complete_depth(const DepthMap& depth, const ObjectMask& region, const SolverOptions& options) {
    if (!region.same_shape(depth)) throw InvalidArgument("region and depth dimensions differ");
    if (!(options.tol > 0)) throw InvalidArgument("solver tolerance must be positive");
    if (options.max_iters < 1) throw InvalidArgument("solver max_iters must be >= 1");

    const int w = depth.width();
    const int h = depth.height();
    CompletionResult result{depth, {}};
    DepthMap& u = result.depth;

    // Label 4-connected components and collect their Dirichlet boundaries.
    constexpr std::size_t kUnlabelled = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> label(depth.size(), kUnlabelled);
    std::vector<Component> comps;
    std::vector<Node> red, black;
    const std::array<std::array<int, 2>, 4> steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

    std::vector<std::array<int, 2>> stack;
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            if (!region.test(sx, sy) || label[depth.index(sx, sy)] != kUnlabelled) continue;
            const std::size_t id = comps.size();
            Component comp;
            comp.seed_x = sx;
            comp.seed_y = sy;
            label[depth.index(sx, sy)] = id;
            stack.push_back({sx, sy});
            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                ++comp.pixels;
                Node node{depth.index(x, y), {}, 0, id};
                for (const auto& [dx, dy] : steps) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (!depth.contains(nx, ny)) continue;
                    const std::size_t ni = depth.index(nx, ny);
                    if (region.test(nx, ny)) {
                        node.neighbours[node.count++] = ni;
                        if (label[ni] == kUnlabelled) {
                            label[ni] = id;
                            stack.push_back({nx, ny});
                        }
                    } else if (depth[ni] > 0.0) {
                        node.neighbours[node.count++] = ni;
                        comp.lo = std::min(comp.lo, depth[ni]);
                        comp.hi = std::max(comp.hi, depth[ni]);
                        comp.sum += depth[ni];
                        ++comp.boundary;
                    }
                }
                ((x + y) % 2 == 0 ? red : black).push_back(node);
            }
            if (comp.boundary == 0) throw CompletionError(comp.seed_x, comp.seed_y, comp.pixels);
            comps.push_back(comp);
        }
    }
    result.stats.components = comps.size();
    if (comps.empty()) return result;

    // Start from the boundary mean; every update is a convex combination, so
    // iterates stay inside [lo, hi] (the clamp only absorbs rounding).
    for (auto* colour : {&red, &black})
        for (const Node& n : *colour) u[n.index] = comps[n.component].sum / static_cast<double>(comps[n.component].boundary);

    auto sweep = [&](const std::vector<Node>& nodes) {
        double worst = 0.0;
        for (const Node& n : nodes) {
            double s = 0.0;
            for (int k = 0; k < n.count; ++k) s += u[n.neighbours[k]];
            const Component& c = comps[n.component];
            const double next = std::clamp(s / n.count, c.lo, c.hi);
            const double change = std::abs(next - u[n.index]) / std::max(std::abs(next), 1e-12);
            worst = std::max(worst, change);
            u[n.index] = next;
        }
        return worst;
    };

    // Stopping: the last update must be below tol, and the remaining error,
    // extrapolated from the observed contraction rate, below tol / 2. Slow
    // geometric convergence would otherwise stop far from the fixed point.
    std::array<double, 3> ratios{1.0, 1.0, 1.0};
    double previous = std::numeric_limits<double>::infinity();
    result.stats.converged = false;
    for (int it = 1; it <= options.max_iters; ++it) {
        const double delta = std::max(sweep(red), sweep(black));
        result.stats.iterations = it;
        result.stats.final_update = delta;
        if (delta == 0.0) {
            result.stats.converged = true;
            break;
        }
        ratios[it % 3] = std::isfinite(previous) ? delta / previous : 1.0;
        previous = delta;
        const double rho = *std::max_element(ratios.begin(), ratios.end());
        if (it >= 3 && delta < options.tol && rho < 1.0 && delta * rho / (1.0 - rho) <= options.tol / 2) {
            result.stats.converged = true;
            break;
        }
    }
    return result;
}

TargetDepthResult build_target_depth(const DepthMap& depth, const ObjectMask& mask, const CompletionRegion& region,
                                     const SolverOptions& options, double fill_value) {
    if (!mask.same_shape(depth) || !region.bits.same_shape(depth))
        throw InvalidArgument("depth, mask and region dimensions differ");
    if (!std::isfinite(fill_value) || fill_value < 0) throw InvalidArgument("fill value must be finite and >= 0");
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i] && region.bits[i]) throw InvalidArgument("completion region overlaps the object mask");

    // Object depths are zeroed first so they never act as boundary values.
    DepthMap work = depth;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) work[i] = 0.0;
    CompletionResult completed = complete_depth(work, region.bits, options);

    TargetDepthResult out{depth, completed.stats};
    for (std::size_t i = 0; i < depth.size(); ++i) {
        if (mask[i]) {
            out.depth[i] = fill_value;
        } else if (region.bits[i]) {
            out.depth[i] = completed.depth[i];
        }
    }
    return out;
}

TrichotomyReport check_trichotomy(const DepthMap& original, const ObjectMask& mask, const CompletionRegion& region,
                                  const DepthMap& completed, const DepthMap& target, double fill_value,
                                  double tolerance) {
    if (!mask.same_shape(original) || !region.bits.same_shape(original) || !completed.same_shape(original) ||
        !target.same_shape(original))
        throw InvalidArgument("trichotomy check: dimensions differ");
    TrichotomyReport rep;
    auto flag = [&](int x, int y, const char* what, double got, double want) {
        ++rep.violations;
        if (rep.details.size() < 8) {
            std::ostringstream ss;
            ss.precision(10);
            ss << what << " pixel (" << x << ", " << y << "): got " << got << ", expected " << want;
            rep.details.push_back(ss.str());
        }
    };
    for (int y = 0; y < original.height(); ++y) {
        for (int x = 0; x < original.width(); ++x) {
            const double got = target.at(x, y);
            if (mask.test(x, y)) {
                ++rep.removed;
                if (std::abs(got - fill_value) > tolerance) flag(x, y, "removed", got, fill_value);
            } else if (region.bits.test(x, y)) {
                ++rep.completed;
                if (std::abs(got - completed.at(x, y)) > tolerance) flag(x, y, "completed", got, completed.at(x, y));
            } else {
                ++rep.kept;
                if (std::abs(got - original.at(x, y)) > tolerance) flag(x, y, "kept", got, original.at(x, y));
            }
        }
    }
    return rep;
}

}  // namespace depthpoison
