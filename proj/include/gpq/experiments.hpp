#pragma once

/**
 * @file experiments.hpp
 * @brief Experiment harness behind the `gpq` command line tool.
 *
 * Configurations are single JSON documents (see configs/ and README.md).
 * Every experiment produces a Table that serialises to CSV (12 significant
 * digits, byte-stable for a fixed config) or JSON (same rows plus a
 * metadata object).
 */

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "gpq/filtering.hpp"
#include "gpq/models.hpp"
#include "gpq/quadrature.hpp"

namespace gpq {

// ---------------------------------------------------------------------------
// Method specifications
// ---------------------------------------------------------------------------

struct PointSpec {
    /// ut | cubature | symmetric5 | gauss-hermite | hammersley | random | optimized | file
    std::string type = "ut";
    double kappa = 1.0;       ///< ut
    int order = 3;            ///< gauss-hermite
    int count = 0;            ///< hammersley, random, optimized
    int count_per_dim = 0;    ///< alternative to count: count_per_dim * n points
    std::uint64_t seed = 0;   ///< random, optimized
    int restarts = 5;         ///< optimized
    std::string file;         ///< file: CSV of unit points

    int resolved_count(int n) const;
};

struct KernelSpec {
    std::string type = "se"; ///< se | ut | gh
    double scale = 1.0;
    double length_scale = 1.0;
    int order = 3;

    Kernel build(int n) const;
};

struct MethodSpec {
    std::string name;
    PointSpec points;
    std::optional<KernelSpec> kernel; ///< empty: classical weights
    double jitter = 0.0;
    bool repair_covariances = false; ///< see FilterOptions
};

/// Unit points for a spec; optimized sets use `kernel` and `jitter`.
UnitPointSet build_points(const PointSpec &spec, int n, const Kernel *kernel = nullptr,
                          double jitter = 0.0);
/// Classical weights for ut/cubature/symmetric5/gauss-hermite, 1/N otherwise;
/// GPQ weights when the method has a kernel.
QuadratureRule build_rule(const MethodSpec &method, int n);

/// Reads unit points from CSV: optional header, one row per point. A header
/// column named "weight" is ignored.
UnitPointSet read_points_csv(const std::string &path);

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    std::string experiment; ///< points | weights | transform | moments | ungm | bot
    std::vector<MethodSpec> methods;
    std::vector<std::uint64_t> seeds;
    int steps = 0;
    int threads = 0; ///< 0: hardware concurrency
    std::string output_path;
    std::string format = "csv";
    /// ungm / bot: when set, one trajectory_seed<seed>.csv per seed is written here
    std::string trajectories_dir;

    // points / weights / transform
    int dim = 1;
    bool include_weights = true;
    std::string function = "identity";
    double function_exponent = 1.0;
    int function_time = 1;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    Eigen::MatrixXd noise;

    // moments
    std::vector<int> dims;
    std::vector<double> exponents;
    std::uint64_t truth_samples = 10000000;
    std::uint64_t truth_seed = 20140101;
    std::string cache_dir;

    // bot
    BotConfig bot;

    nlohmann::json raw;
};

/// Throws ConfigError on malformed or inconsistent configurations.
ExperimentConfig parse_config(const nlohmann::json &doc);
ExperimentConfig load_config(const std::string &path);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

using Cell = std::variant<double, long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    nlohmann::json metadata = nlohmann::json::object();
};

std::string to_csv(const Table &table);
nlohmann::json to_json(const Table &table);

/**
 * KL(p || q) = 0.5 [tr(Sq^{-1} Sp) + (mq - mp)^T Sq^{-1} (mq - mp) - n
 *               + ln(det Sq / det Sp)].
 * Throws NumericalError if either covariance is not positive definite.
 */
double kl_gauss(const GaussianState &p, const GaussianState &q);

struct RmseSummary {
    double mean = 0.0;
    double std = 0.0;
    int ok = 0;
    int failed = 0;
};

struct MethodResult {
    std::string name;
    std::vector<double> filter_rmse;   ///< per seed, NaN where the run failed
    std::vector<double> smoother_rmse;
    RmseSummary filter;
    RmseSummary smoother;
    std::string error; ///< first failure message, empty when every seed ran
};

struct MonteCarloReport {
    std::string experiment;
    std::vector<MethodResult> methods;
    nlohmann::json metadata = nlohmann::json::object();

    const MethodResult *find(const std::string &name) const;
    bool all_failed() const;
};

struct MomentsTruth {
    int dim = 0;
    double exponent = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

struct MomentsCell {
    std::string method;
    int dim = 0;
    double exponent = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    std::optional<double> kl; ///< empty when the method failed in this cell
    std::string error;
};

struct MomentsReport {
    std::vector<MomentsTruth> truths;
    std::vector<MomentsCell> cells;
    nlohmann::json metadata = nlohmann::json::object();

    const MomentsCell *find(const std::string &method, int dim, double exponent) const;
    bool all_failed() const;
};

/// Seeded Monte Carlo estimate of E[y] and Var[y] for x ~ N(0, I_n), using
/// the radial reduction x^T x ~ chi^2_n.
MomentsTruth moments_truth(int n, double p, std::uint64_t samples, std::uint64_t seed,
                           const std::string &cache_dir = {});

MomentsReport run_moments(const ExperimentConfig &cfg);
MonteCarloReport run_ungm(const ExperimentConfig &cfg);
MonteCarloReport run_bot(const ExperimentConfig &cfg);

Table to_table(const MomentsReport &report);
Table to_table(const MonteCarloReport &report);

Table run_points(const ExperimentConfig &cfg);
Table run_weights(const ExperimentConfig &cfg);
Table run_transform(const ExperimentConfig &cfg);

} // namespace gpq
