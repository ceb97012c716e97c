#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "depthpoison/error.hpp"
#include "depthpoison/raster.hpp"

namespace depthpoison {

/// Band of pixels around the object whose depth is re-synthesized once the
/// object is removed. Disjoint from the object mask by construction.
struct CompletionRegion {
    ObjectMask bits;
    int radius = 0;
};

/// Square (Chebyshev) dilation of `mask` by `radius`, minus the mask itself.
CompletionRegion compute_completion_region(const ObjectMask& mask, int radius);

struct SolverOptions {
    double tol = 1e-4;      // relative
    int max_iters = 10000;  // red-black sweeps
};

struct SolverStats {
    int iterations = 0;
    double final_update = 0.0;  // max relative change in the last sweep
    bool converged = true;
    std::size_t components = 0;
};

struct CompletionResult {
    DepthMap depth;
    SolverStats stats;
};

/// A 4-connected region component that touches no valid depth.
class CompletionError : public Error {
public:
    CompletionError(int seed_x, int seed_y, std::size_t pixels);
    int seed_x() const { return seed_x_; }
    int seed_y() const { return seed_y_; }
    std::size_t pixels() const { return pixels_; }

private:
    int seed_x_, seed_y_;
    std::size_t pixels_;
};

/// Harmonic interpolation over `region`. Each region pixel becomes the mean
/// of its in-image 4-neighbours that are either region pixels or valid
/// (depth > 0) non-region pixels; other neighbours are left out of the
/// stencil. Solved by red-black Gauss-Seidel. Pixels outside the region are
/// returned unchanged.
CompletionResult complete_depth(const DepthMap& depth, const ObjectMask& region, const SolverOptions& options = {});

struct TargetDepthResult {
    DepthMap depth;
    SolverStats stats;
};

/// Object-level target depth:
///   mask pixel                 -> fill_value (0 = removed)
///   region pixel outside mask  -> harmonic completion, object depths excluded
///   everything else            -> input depth
TargetDepthResult build_target_depth(const DepthMap& depth, const ObjectMask& mask, const CompletionRegion& region,
                                     const SolverOptions& options = {}, double fill_value = 0.0);

/// Which case of the target-depth partition a pixel falls into.
enum class DepthCase { removed, completed, kept };

struct TrichotomyReport {
    std::size_t removed = 0, completed = 0, kept = 0;
    std::size_t violations = 0;
    std::vector<std::string> details;  // first few violations
    bool ok() const { return violations == 0; }
};

/// Checks `target` against `original` case by case. `completed` holds the
/// expected values on the region (pass the solver output); tolerance 0 means
/// exact equality.
TrichotomyReport check_trichotomy(const DepthMap& original, const ObjectMask& mask, const CompletionRegion& region,
                                  const DepthMap& completed, const DepthMap& target, double fill_value = 0.0,
                                  double tolerance = 0.0);

}  // namespace depthpoison
