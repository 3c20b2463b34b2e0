#pragma once

#include <cstdint>

#include "gpq/kernels.hpp"
#include "gpq/points.hpp"

namespace gpq {

struct OptimizerOptions {
    int restarts = 5;
    int max_iterations = 500;
    double gradient_tolerance = 1e-10;
    double jitter = 0.0;
    /// Start restart 0 from the Hammersley set instead of a random draw.
    bool hammersley_start = true;
};

/// Upper bound on N * n for optimize_points.
constexpr int kMaxOptimizedCoordinates = 400;

/**
 * Minimum-variance unit points for kernel k: BFGS over the stacked N*n
 * coordinates, central finite-difference gradients with step
 * 1e-6 * max(1, |xi|), several restarts, lowest gpq_variance kept (ties go
 * to the earlier restart). A restart whose objective turns non-finite or
 * singular is retried from a fresh random draw; if no restart succeeds a
 * NumericalError is thrown.
 */
UnitPointSet optimize_points(const Kernel &k, int n, int count, std::uint64_t seed,
                             const OptimizerOptions &opts = {});

} // namespace gpq
