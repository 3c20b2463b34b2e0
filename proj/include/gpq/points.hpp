#pragma once

/**
 * @file points.hpp
 * @brief Unit sigma-point sets in R^n and the classical rules built on them.
 *
 * Point sets are stored column-wise: points is n x N and column i is the
 * unit sigma-point xi_i. Sigma-points for N(m, P) are m + sqrt(P) xi_i.
 */

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace gpq {

enum class PointFamily {
    UT,           ///< parameter: kappa
    Cubature,
    Symmetric5,
    GaussHermite, ///< parameter: order P
    Random,       ///< parameter: seed
    Hammersley,
    Optimized,    ///< parameter: seed
    Custom,
};

std::string to_string(PointFamily family);

struct UnitPointSet {
    Eigen::MatrixXd points; ///< n x N
    PointFamily family = PointFamily::Custom;
    double parameter = 0.0;

    int dim() const { return static_cast<int>(points.rows()); }
    int size() const { return static_cast<int>(points.cols()); }
    Eigen::VectorXd point(int i) const { return points.col(i); }

    /// Throws std::invalid_argument on empty or non-finite sets.
    void validate() const;
};

/// A point set with its classical (polynomial-exactness) weights.
struct ClassicalRule {
    UnitPointSet points;
    Eigen::VectorXd weights;
};

/// Canonical unscented transform: origin plus +-sqrt(n + kappa) e_i.
/// Ordering: origin, +e_1..+e_n, -e_1..-e_n. Requires n + kappa > 0.
ClassicalRule ut_points(int n, double kappa);

/// Third-order spherical cubature: +-sqrt(n) e_i with equal weights 1/(2n).
ClassicalRule cubature_points(int n);

/**
 * Fifth-degree fully symmetric rule with 2n^2 + 1 points: the origin,
 * +-lambda e_i, and (+-lambda, +-lambda) in every coordinate plane, with
 * lambda = sqrt(3). The three weights are solved from the moment equations
 * for 1, xi_1^2 and xi_1^2 xi_2^2 and then checked against xi_1^4.
 * Requires n >= 2.
 */
ClassicalRule symmetric5_points(int n);

/// Largest tensor grid gauss_hermite_points builds.
constexpr long kMaxTensorPoints = 1000000;

/// Tensor product of the order-P one-dimensional Gauss-Hermite rule.
/// Points are enumerated with the first coordinate varying slowest.
ClassicalRule gauss_hermite_points(int n, int order);

/**
 * Hammersley set in the unit cube [0,1)^n: first coordinate (i + 0.5) / N,
 * coordinate d >= 1 the radical inverse of i in the d-th prime base.
 */
Eigen::MatrixXd hammersley_unit(int n, int count);

/**
 * Hammersley points mapped to N(0, I) through the inverse normal CDF.
 * The radical-inverse coordinates are shifted by half their grid spacing
 * 1 / (2 b^m), b^m >= N, so that u = 0 never reaches the quantile.
 */
UnitPointSet hammersley_points(int n, int count);

/**
 * i.i.d. N(0, I) draws from std::mt19937_64 seeded with `seed`, transformed
 * with std::normal_distribution<double>. Bitwise reproducible for a given
 * standard library.
 */
UnitPointSet random_points(int n, int count, std::uint64_t seed);

/// Equal weights 1/N on an arbitrary set (plain Monte Carlo / QMC).
ClassicalRule equal_weight_rule(UnitPointSet points);

} // namespace gpq
