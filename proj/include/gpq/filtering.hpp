#pragma once

/**
 * @file filtering.hpp
 * @brief Sigma-point Gaussian filter and RTS smoother driven by any QuadratureRule.
 *
 * With classical rules these are the UKF/CKF/GHKF and their smoothers; with
 * GPQ rules they are the Gaussian process quadrature filter and smoother.
 * The unit points and weights are fixed for a run; sigma-points are
 * re-formed from the current (m, P) at every prediction, update and
 * smoothing step.
 */

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "gpq/quadrature.hpp"

namespace gpq {

struct GaussianState {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    int dim() const { return static_cast<int>(mean.size()); }
};

/**
 * x_k = f(x_{k-1}, k) + q_{k-1},  q_{k-1} ~ N(0, Q(k))
 * y_k = h(x_k, k) + r_k,          r_k ~ N(0, R(k))
 * for k = 1..T, with x_0 ~ prior. Q(k) is the covariance of the noise
 * entering x_k.
 */
struct StateSpaceModel {
    std::function<Eigen::VectorXd(const Eigen::VectorXd &, int)> transition;
    std::function<Eigen::VectorXd(const Eigen::VectorXd &, int)> measurement;
    std::function<Eigen::MatrixXd(int)> process_noise;
    std::function<Eigen::MatrixXd(int)> measurement_noise;
    GaussianState prior;
    int measurement_dim = 0;

    int state_dim() const { return prior.dim(); }
};

struct UpdateResult {
    GaussianState filtered;
    Eigen::VectorXd innovation_mean; ///< mu_k
    Eigen::MatrixXd innovation_cov;  ///< S_k
    Eigen::MatrixXd cross_cov;       ///< C_k
    Eigen::MatrixXd gain;            ///< K_k
};

struct FilterStep {
    GaussianState predicted;
    GaussianState filtered;
    Eigen::VectorXd innovation_mean;
    Eigen::MatrixXd innovation_cov;
};

using FilterOutput = std::vector<FilterStep>;

struct FilterOptions {
    /// Rules with negative weights can produce indefinite moment estimates.
    /// When set, the weighted spread term of every transform is projected
    /// onto the PSD cone before the noise is added, and posterior
    /// covariances have negative eigenvalues clipped to zero.
    bool repair_covariances = false;
};

/// Nearest (Frobenius) symmetric PSD matrix; returns the input unchanged if
/// it is already PSD.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd &m);

GaussianState predict(const GaussianState &state, const QuadratureRule &rule,
                      const VectorFunction &f, const Eigen::MatrixXd &process_noise,
                      const FilterOptions &opts = {});

UpdateResult update(const GaussianState &predicted, const QuadratureRule &rule,
                    const VectorFunction &h, const Eigen::MatrixXd &measurement_noise,
                    const Eigen::VectorXd &y, const FilterOptions &opts = {});

/// Steps k = 1..T for measurements ys[0..T-1]. Errors carry the time index.
FilterOutput run_filter(const StateSpaceModel &model, const QuadratureRule &rule,
                        const std::vector<Eigen::VectorXd> &ys, const FilterOptions &opts = {});

/// Smoothed states for k = 1..T; the last equals the last filtered state.
std::vector<GaussianState> run_smoother(const StateSpaceModel &model, const QuadratureRule &rule,
                                        const FilterOutput &filtered,
                                        const FilterOptions &opts = {});

} // namespace gpq
