#pragma once

/**
 * @file models.hpp
 * @brief Benchmark state-space models and test integrands.
 */

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gpq/filtering.hpp"

namespace gpq {

// ---------------------------------------------------------------------------
// Univariate non-linear growth model
// ---------------------------------------------------------------------------

/// x/2 + 25 x / (1 + x^2) + 8 cos(1.2 k); k is the index of the state produced.
double ungm_transition(double x, int k);
double ungm_measurement(double x);

/// x_0 ~ N(0, 5), Q = 10, R = 1 (all variances).
StateSpaceModel ungm_model();

// ---------------------------------------------------------------------------
// Coordinated turn with bearings-only measurements
// ---------------------------------------------------------------------------

/// Defaults: sensors on a kilometre scale around the origin, sigma_theta =
/// 0.05 rad, dt = 1 s, q1 = 0.1 m^2 s^-3, q2 = 1.75e-4 s^-3.
struct BotConfig {
    std::array<Eigen::Vector2d, 4> sensors{
        Eigen::Vector2d(-1500.0, 500.0), Eigen::Vector2d(1000.0, 1000.0),
        Eigen::Vector2d(-300.0, -1500.0), Eigen::Vector2d(1200.0, -1100.0)};
    double bearing_std = 0.05;
    double dt = 1.0;
    double q1 = 0.1;
    double q2 = 1.75e-4;
    /// State (x1, x1', x2, x2', omega).
    GaussianState prior = default_prior();

    static GaussianState default_prior();
    void validate() const;
};

/// Deterministic coordinated-turn step for state (x1, x1', x2, x2', omega).
Eigen::VectorXd coordinated_turn(const Eigen::VectorXd &x, double dt);
Eigen::MatrixXd coordinated_turn_noise(double q1, double q2, double dt);
/// Four-quadrant bearing from each sensor to (x1, x2).
Eigen::VectorXd bearings(const Eigen::VectorXd &x, const std::array<Eigen::Vector2d, 4> &sensors);

StateSpaceModel bot_model(const BotConfig &cfg);

// ---------------------------------------------------------------------------
// Moment integrands y(x) = (1 + x^T x)^{p/2}
// ---------------------------------------------------------------------------

struct MomentIntegrand {
    double exponent = 1.0;
    /// False when the exponent is outside {1, -2, -3, -5}.
    bool standard_exponent = true;
    std::function<double(const Eigen::VectorXd &)> y;
    std::function<double(const Eigen::VectorXd &)> y_squared;
};

MomentIntegrand moment_integrand(double p);

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct Trajectory {
    std::vector<Eigen::VectorXd> states;       ///< x_0 .. x_T
    std::vector<Eigen::VectorXd> measurements; ///< y_1 .. y_T
    std::uint64_t seed = 0;
};

/// Samples x_0 from the prior and iterates the model with its own noises.
/// Deterministic per seed (std::mt19937_64, std::normal_distribution).
Trajectory simulate(const StateSpaceModel &model, int steps, std::uint64_t seed);

/// CSV with columns k, x_1..x_n, y_1..y_d (17 significant digits); the k=0
/// row has empty measurement cells.
std::string trajectory_csv(const Trajectory &t);

} // namespace gpq
