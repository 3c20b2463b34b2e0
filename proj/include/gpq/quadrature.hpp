#pragma once

/**
 * @file quadrature.hpp
 * @brief Gaussian process quadrature rules and the Gaussian process transform.
 *
 * A GP is placed on the decoupled integrand xi -> g(m + sqrt(P) xi); the
 * posterior mean of its integral against N(0, I) is the weighted sum
 * sum_i W_i g(m + sqrt(P) xi_i) with weights solving (K + sigma^2 I) W = q.
 *
 * Weight solves run in binary128 arithmetic. The squared exponential Gram
 * matrix loses its information content in double precision long before
 * the weights stop converging (condition numbers pass 1e16 near l = 1e4 on
 * UT points), while the weights themselves are perfectly well behaved.
 */

#include <functional>
#include <optional>

#include <Eigen/Core>

#include "gpq/kernels.hpp"
#include "gpq/points.hpp"

namespace gpq {

/// Jitter used for squared exponential rules inside filters and experiments.
constexpr double kDefaultSeJitter = 1e-8;

struct QuadratureRule {
    UnitPointSet points;
    Eigen::VectorXd weights;
    double jitter = 0.0;
    /// GP posterior variance of the integral; empty for classical rules.
    std::optional<double> posterior_variance;

    int dim() const { return points.dim(); }
    int size() const { return points.size(); }
};

/// Wraps classical weights as a rule (no posterior variance).
QuadratureRule make_rule(const ClassicalRule &classical);

/**
 * GPQ weights for kernel k on the given unit points. Throws NumericalError
 * when K + jitter I is not numerically positive definite; the message
 * suggests raising the jitter rather than regularising silently.
 */
QuadratureRule gpq_weights(const Kernel &k, const UnitPointSet &points, double jitter);

/// int int K N N - q^T (K + jitter I)^{-1} q, clamped to 0 within -1e-9.
double gpq_variance(const Kernel &k, const UnitPointSet &points, double jitter);

using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd &)>;

struct MatrixSqrt {
    Eigen::MatrixXd factor; ///< L with L L^T = P
    bool used_eigen_fallback = false;
};

/**
 * Cholesky factor of a symmetric PSD matrix. When Cholesky fails on a
 * matrix that is PSD within -1e-10 |P|, negative eigenvalues are clipped
 * and the symmetric square root is returned with used_eigen_fallback set.
 * Throws NumericalError for asymmetric (beyond 1e-9 relative) or
 * indefinite input.
 */
MatrixSqrt matrix_sqrt(const Eigen::MatrixXd &p);

/// Sigma-points m + sqrt(P) xi_i as columns.
Eigen::MatrixXd sigma_points(const UnitPointSet &points, const Eigen::VectorXd &mean,
                             const Eigen::MatrixXd &cov);

/// sum_i W_i g(m + sqrt(P) xi_i).
Eigen::VectorXd apply_rule(const QuadratureRule &rule, const VectorFunction &g,
                           const Eigen::VectorXd &mean, const Eigen::MatrixXd &cov);

struct TransformResult {
    Eigen::VectorXd mean;      ///< mu
    Eigen::MatrixXd cov;       ///< S, includes the additive noise
    Eigen::MatrixXd cross_cov; ///< C, input x output
};

/// Moment matching of (x, g(x) + q) with x ~ N(m, P) and q ~ N(0, Q).
TransformResult gp_transform(const QuadratureRule &rule, const VectorFunction &g,
                             const Eigen::VectorXd &mean, const Eigen::MatrixXd &cov,
                             const Eigen::MatrixXd &noise);

/**
 * Noise-free GP regression posterior mean k(x*)^T (K + jitter I)^{-1} o
 * with training inputs as columns of `inputs`.
 */
double gp_regression_mean(const Kernel &k, const Eigen::MatrixXd &inputs,
                          const Eigen::VectorXd &observations, double jitter,
                          const Eigen::VectorXd &query);

} // namespace gpq
