#include "gpq/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Cholesky>

#include "gpq/errors.hpp"
#include "gpq/optimize.hpp"

namespace gpq {

using nlohmann::json;

namespace {

constexpr const char *kVersion = "gpq 1.0.0";

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

template <typename T>
T value_or(const json &obj, const char *key, T fallback)
{
    if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null())
        return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

Eigen::VectorXd to_vector(const json &j, const char *what)
{
    if (!j.is_array())
        throw ConfigError(std::string(what) + " must be an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw ConfigError(std::string(what) + " must be an array of numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Eigen::MatrixXd to_matrix(const json &j, const char *what)
{
    if (!j.is_array() || j.empty())
        throw ConfigError(std::string(what) + " must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::VectorXd row = to_vector(j[static_cast<std::size_t>(r)], what);
        if (r == 0)
            m.resize(rows, row.size());
        else if (row.size() != m.cols())
            throw ConfigError(std::string(what) + " has rows of different lengths");
        m.row(r) = row.transpose();
    }
    return m;
}

PointSpec parse_point_spec(const json &j)
{
    if (!j.is_object())
        throw ConfigError("'points' must be an object");
    PointSpec p;
    p.type = value_or<std::string>(j, "type", "");
    if (p.type == "gh")
        p.type = "gauss-hermite";
    static const std::vector<std::string> known = {"ut",         "cubature", "symmetric5",
                                                   "gauss-hermite", "hammersley", "random",
                                                   "optimized",  "file"};
    if (std::find(known.begin(), known.end(), p.type) == known.end())
        throw ConfigError("unknown point set type '" + p.type + "'");
    p.kappa = value_or<double>(j, "kappa", p.kappa);
    p.order = value_or<int>(j, "order", p.order);
    p.count = value_or<int>(j, "count", 0);
    p.count_per_dim = value_or<int>(j, "count_per_dim", 0);
    p.seed = value_or<std::uint64_t>(j, "seed", 0);
    p.restarts = value_or<int>(j, "restarts", p.restarts);
    p.file = value_or<std::string>(j, "file", "");
    const bool needs_count = p.type == "hammersley" || p.type == "random" || p.type == "optimized";
    if (needs_count && p.count <= 0 && p.count_per_dim <= 0)
        throw ConfigError("point set '" + p.type + "' needs a positive 'count' or 'count_per_dim'");
    if (p.type == "file" && p.file.empty())
        throw ConfigError("point set 'file' needs a 'file' path");
    return p;
}

std::optional<KernelSpec> parse_kernel_spec(const json &j)
{
    if (j.is_null() || (j.is_string() && j.get<std::string>() == "classical"))
        return std::nullopt;
    if (!j.is_object())
        throw ConfigError("'kernel' must be \"classical\" or an object");
    KernelSpec k;
    k.type = value_or<std::string>(j, "type", "se");
    if (k.type != "se" && k.type != "ut" && k.type != "gh")
        throw ConfigError("unknown kernel type '" + k.type + "' (expected se, ut or gh)");
    k.scale = value_or<double>(j, "scale", 1.0);
    k.length_scale = value_or<double>(j, "length_scale", 1.0);
    k.order = value_or<int>(j, "order", 3);
    return k;
}

MethodSpec parse_method(const json &j, std::size_t index)
{
    if (!j.is_object())
        throw ConfigError("each method must be an object");
    MethodSpec m;
    m.points = parse_point_spec(j.value("points", json::object()));
    m.kernel = parse_kernel_spec(j.contains("kernel") ? j.at("kernel") : json());
    const double default_jitter = (m.kernel && m.kernel->type == "se") ? kDefaultSeJitter : 0.0;
    m.jitter = value_or<double>(j, "jitter", default_jitter);
    if (!(m.jitter >= 0.0))
        throw ConfigError("jitter must be >= 0");
    m.name = value_or<std::string>(j, "name", "method-" + std::to_string(index));
    m.repair_covariances = value_or<bool>(j, "repair_covariances", false);
    if (m.points.type == "optimized" && !m.kernel)
        throw ConfigError("method '" + m.name + "': optimized points need a kernel");
    return m;
}

std::vector<std::uint64_t> parse_seeds(const json &j)
{
    std::vector<std::uint64_t> seeds;
    if (j.is_array()) {
        for (const auto &s : j)
            seeds.push_back(s.get<std::uint64_t>());
    } else if (j.is_object()) {
        const auto start = value_or<std::uint64_t>(j, "start", 0);
        const auto count = value_or<std::uint64_t>(j, "count", 0);
        for (std::uint64_t i = 0; i < count; ++i)
            seeds.push_back(start + i);
    } else if (!j.is_null()) {
        throw ConfigError("'seeds' must be an array or {\"start\", \"count\"}");
    }
    return seeds;
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_escape(const std::string &s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string format_cell(const Cell &c)
{
    if (const auto *d = std::get_if<double>(&c))
        return format_double(*d);
    if (const auto *l = std::get_if<long>(&c))
        return std::to_string(*l);
    return csv_escape(std::get<std::string>(c));
}

json cell_json(const Cell &c)
{
    if (const auto *d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d))
            return format_double(*d);
        return *d;
    }
    if (const auto *l = std::get_if<long>(&c))
        return *l;
    return std::get<std::string>(c);
}

json base_metadata(const ExperimentConfig &cfg)
{
    json meta;
    meta["version"] = kVersion;
    meta["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION);
    meta["config"] = cfg.raw;
    return meta;
}

int thread_count(const ExperimentConfig &cfg, std::size_t jobs)
{
    int t = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    t = std::max(1, t);
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(t), std::max<std::size_t>(jobs, 1)));
}

/// Runs body(i) for i in [0, jobs) on a small pool; results must be written
/// to slots indexed by i.
template <typename Body>
void parallel_for(std::size_t jobs, int threads, Body body)
{
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs; i = next++)
            body(i);
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto &th : pool)
        th.join();
}

RmseSummary summarize(const std::vector<double> &values)
{
    RmseSummary s;
    double sum = 0.0;
    for (double v : values) {
        if (std::isfinite(v)) {
            ++s.ok;
            sum += v;
        } else {
            ++s.failed;
        }
    }
    if (s.ok == 0) {
        s.mean = s.std = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    s.mean = sum / s.ok;
    double ss = 0.0;
    for (double v : values)
        if (std::isfinite(v))
            ss += (v - s.mean) * (v - s.mean);
    s.std = s.ok > 1 ? std::sqrt(ss / (s.ok - 1)) : 0.0;
    return s;
}

using ErrorFn = std::function<double(const Eigen::VectorXd &truth, const Eigen::VectorXd &est)>;

MonteCarloReport run_monte_carlo(const ExperimentConfig &cfg, const StateSpaceModel &model,
                                 const ErrorFn &squared_error, const std::string &name)
{
    const auto started = std::chrono::steady_clock::now();
    if (cfg.seeds.empty())
        throw ConfigError(name + ": 'seeds' must be non-empty");
    if (cfg.steps < 1)
        throw ConfigError(name + ": 'steps' must be >= 1");
    if (cfg.methods.empty())
        throw ConfigError(name + ": at least one method is required");

    const std::size_t n_methods = cfg.methods.size();
    const std::size_t n_seeds = cfg.seeds.size();

    std::vector<std::optional<QuadratureRule>> rules(n_methods);
    std::vector<std::string> build_errors(n_methods);
    for (std::size_t m = 0; m < n_methods; ++m) {
        try {
            rules[m] = build_rule(cfg.methods[m], model.state_dim());
        } catch (const ConfigError &) {
            throw;
        } catch (const std::exception &e) {
            build_errors[m] = std::string("rule construction failed: ") + e.what();
        }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> filt(n_methods, std::vector<double>(n_seeds, nan));
    std::vector<std::vector<double>> smooth(n_methods, std::vector<double>(n_seeds, nan));
    std::vector<std::vector<std::string>> errors(n_methods, std::vector<std::string>(n_seeds));
    std::vector<std::string> io_failed(n_seeds);
    if (!cfg.trajectories_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.trajectories_dir, ec);
        if (ec)
            throw ConfigError("cannot create trajectories_dir '" + cfg.trajectories_dir +
                              "': " + ec.message());
    }

    parallel_for(n_seeds, thread_count(cfg, n_seeds), [&](std::size_t s) {
        Trajectory traj;
        try {
            traj = simulate(model, cfg.steps, cfg.seeds[s]);
        } catch (const std::exception &e) {
            for (std::size_t m = 0; m < n_methods; ++m)
                errors[m][s] = std::string("simulation failed: ") + e.what();
            return;
        }
        if (!cfg.trajectories_dir.empty()) {
            const auto path = std::filesystem::path(cfg.trajectories_dir) /
                              ("trajectory_seed" + std::to_string(cfg.seeds[s]) + ".csv");
            std::ofstream f(path, std::ios::binary);
            f << trajectory_csv(traj);
            if (!f)
                io_failed[s] = path.string();
        }
        for (std::size_t m = 0; m < n_methods; ++m) {
            if (!rules[m]) {
                errors[m][s] = build_errors[m];
                continue;
            }
            try {
                const FilterOptions opts{cfg.methods[m].repair_covariances};
                const FilterOutput out = run_filter(model, *rules[m], traj.measurements, opts);
                const std::vector<GaussianState> sm = run_smoother(model, *rules[m], out, opts);
                double fe = 0.0, se = 0.0;
                for (std::size_t k = 0; k < out.size(); ++k) {
                    fe += squared_error(traj.states[k + 1], out[k].filtered.mean);
                    se += squared_error(traj.states[k + 1], sm[k].mean);
                }
                const double f_rmse = std::sqrt(fe / static_cast<double>(out.size()));
                const double s_rmse = std::sqrt(se / static_cast<double>(out.size()));
                if (!std::isfinite(f_rmse) || !std::isfinite(s_rmse))
                    throw NumericalError("non-finite RMSE");
                filt[m][s] = f_rmse;
                smooth[m][s] = s_rmse;
            } catch (const std::exception &e) {
                errors[m][s] = "seed " + std::to_string(cfg.seeds[s]) + ": " + e.what();
            }
        }
    });

    for (const std::string &f : io_failed)
        if (!f.empty())
            throw ConfigError("cannot write trajectory file '" + f + "'");

    MonteCarloReport report;
    report.experiment = name;
    for (std::size_t m = 0; m < n_methods; ++m) {
        MethodResult r;
        r.name = cfg.methods[m].name;
        r.filter_rmse = std::move(filt[m]);
        r.smoother_rmse = std::move(smooth[m]);
        r.filter = summarize(r.filter_rmse);
        r.smoother = summarize(r.smoother_rmse);
        for (const auto &e : errors[m]) {
            if (!e.empty()) {
                r.error = e;
                break;
            }
        }
        report.methods.push_back(std::move(r));
    }
    report.metadata = base_metadata(cfg);
    report.metadata["experiment"] = name;
    report.metadata["metric"] = name == "bot" ? "position RMSE" : "state RMSE";
    report.metadata["seeds"] = cfg.seeds;
    report.metadata["steps"] = cfg.steps;
    report.metadata["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

VectorFunction transform_function(const ExperimentConfig &cfg)
{
    const std::string &f = cfg.function;
    if (f == "identity")
        return [](const Eigen::VectorXd &x) { return x; };
    if (f == "square")
        return [](const Eigen::VectorXd &x) { return Eigen::VectorXd(x.array().square()); };
    if (f == "moment") {
        const MomentIntegrand mi = moment_integrand(cfg.function_exponent);
        return [mi](const Eigen::VectorXd &x) { return Eigen::VectorXd::Constant(1, mi.y(x)); };
    }
    if (f == "ungm_transition") {
        const int k = cfg.function_time;
        return [k](const Eigen::VectorXd &x) {
            return Eigen::VectorXd::Constant(1, ungm_transition(x(0), k));
        };
    }
    if (f == "ungm_measurement")
        return [](const Eigen::VectorXd &x) {
            return Eigen::VectorXd::Constant(1, ungm_measurement(x(0)));
        };
    if (f == "polar_to_cartesian")
        return [](const Eigen::VectorXd &x) {
            Eigen::VectorXd y(2);
            y << x(0) * std::cos(x(1)), x(0) * std::sin(x(1));
            return y;
        };
    throw ConfigError("unknown transform function '" + f + "'");
}

} // namespace

// ---------------------------------------------------------------------------
// Specs and rules
// ---------------------------------------------------------------------------

int PointSpec::resolved_count(int n) const
{
    return count > 0 ? count : count_per_dim * n;
}

Kernel KernelSpec::build(int n) const
{
    if (type == "se")
        return Kernel::squared_exponential(scale, length_scale);
    if (type == "ut")
        return make_ut_kernel(n, order);
    if (type == "gh")
        return make_gh_kernel(n, order);
    throw ConfigError("unknown kernel type '" + type + "'");
}

UnitPointSet build_points(const PointSpec &spec, int n, const Kernel *kernel, double jitter)
{
    if (spec.type == "ut")
        return ut_points(n, spec.kappa).points;
    if (spec.type == "cubature")
        return cubature_points(n).points;
    if (spec.type == "symmetric5")
        return symmetric5_points(n).points;
    if (spec.type == "gauss-hermite")
        return gauss_hermite_points(n, spec.order).points;
    if (spec.type == "hammersley")
        return hammersley_points(n, spec.resolved_count(n));
    if (spec.type == "random")
        return random_points(n, spec.resolved_count(n), spec.seed);
    if (spec.type == "optimized") {
        if (!kernel)
            throw ConfigError("optimized points need a kernel");
        OptimizerOptions opts;
        opts.restarts = spec.restarts;
        opts.jitter = jitter;
        return optimize_points(*kernel, n, spec.resolved_count(n), spec.seed, opts);
    }
    if (spec.type == "file") {
        UnitPointSet set = read_points_csv(spec.file);
        if (set.dim() != n)
            throw ConfigError("point file '" + spec.file + "' has dimension " +
                              std::to_string(set.dim()) + ", expected " + std::to_string(n));
        return set;
    }
    throw ConfigError("unknown point set type '" + spec.type + "'");
}

QuadratureRule build_rule(const MethodSpec &method, int n)
{
    if (method.kernel) {
        const Kernel k = method.kernel->build(n);
        const UnitPointSet pts = build_points(method.points, n, &k, method.jitter);
        return gpq_weights(k, pts, method.jitter);
    }
    const std::string &t = method.points.type;
    if (t == "ut")
        return make_rule(ut_points(n, method.points.kappa));
    if (t == "cubature")
        return make_rule(cubature_points(n));
    if (t == "symmetric5")
        return make_rule(symmetric5_points(n));
    if (t == "gauss-hermite")
        return make_rule(gauss_hermite_points(n, method.points.order));
    return make_rule(equal_weight_rule(build_points(method.points, n)));
}

UnitPointSet read_points_csv(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open point file '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::vector<bool> keep;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            fields.push_back(field);
        if (first) {
            first = false;
            bool header = false;
            for (const auto &f : fields) {
                char *end = nullptr;
                std::strtod(f.c_str(), &end);
                if (end == f.c_str())
                    header = true;
            }
            keep.assign(fields.size(), true);
            if (header) {
                for (std::size_t i = 0; i < fields.size(); ++i)
                    keep[i] = fields[i] != "weight" && fields[i] != "index" &&
                              fields[i] != "posterior_variance";
                continue;
            }
        }
        if (fields.size() != keep.size())
            throw ConfigError("point file '" + path + "' has rows of different lengths");
        std::vector<double> row;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (!keep[i])
                continue;
            char *end = nullptr;
            const double v = std::strtod(fields[i].c_str(), &end);
            if (end == fields[i].c_str())
                throw ConfigError("point file '" + path + "': cannot parse '" + fields[i] + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().empty())
        throw ConfigError("point file '" + path + "' contains no points");
    UnitPointSet set;
    set.family = PointFamily::Custom;
    set.points.resize(static_cast<Eigen::Index>(rows.front().size()),
                      static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t d = 0; d < rows[i].size(); ++d)
            set.points(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) = rows[i][d];
    set.validate();
    return set;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const json &doc)
{
    if (!doc.is_object())
        throw ConfigError("configuration must be a JSON object");
    ExperimentConfig cfg;
    cfg.raw = doc;
    cfg.experiment = value_or<std::string>(doc, "experiment", "");
    static const std::vector<std::string> known = {"points", "weights", "transform",
                                                   "moments", "ungm",   "bot"};
    if (std::find(known.begin(), known.end(), cfg.experiment) == known.end())
        throw ConfigError("unknown or missing 'experiment' (expected one of points, weights, "
                          "transform, moments, ungm, bot)");

    cfg.seeds = parse_seeds(doc.contains("seeds") ? doc.at("seeds") : json());
    cfg.steps = value_or<int>(doc, "steps", 0);
    cfg.threads = value_or<int>(doc, "threads", 0);
    if (doc.contains("output")) {
        const json &out = doc.at("output");
        cfg.output_path = value_or<std::string>(out, "path", "");
        cfg.format = value_or<std::string>(out, "format", "csv");
        cfg.trajectories_dir = value_or<std::string>(out, "trajectories_dir", "");
    }
    if (doc.contains("methods")) {
        const json &ms = doc.at("methods");
        if (!ms.is_array())
            throw ConfigError("'methods' must be an array");
        for (std::size_t i = 0; i < ms.size(); ++i)
            cfg.methods.push_back(parse_method(ms[i], i));
    }
    if (doc.contains("method"))
        cfg.methods.push_back(parse_method(doc.at("method"), 0));

    cfg.dim = value_or<int>(doc, "dim", 1);
    cfg.include_weights = value_or<bool>(doc, "include_weights", true);

    if (cfg.experiment == "points" || cfg.experiment == "weights") {
        if (cfg.dim < 1)
            throw ConfigError("'dim' must be >= 1");
        MethodSpec m;
        m.name = cfg.experiment;
        if (doc.contains("points"))
            m.points = parse_point_spec(doc.at("points"));
        else if (doc.contains("points_file"))
            m.points = parse_point_spec(json{{"type", "file"}, {"file", doc.at("points_file")}});
        else
            throw ConfigError("'" + cfg.experiment + "' needs 'points' or 'points_file'");
        m.kernel = parse_kernel_spec(doc.contains("kernel") ? doc.at("kernel") : json());
        const double dj = (m.kernel && m.kernel->type == "se") ? kDefaultSeJitter : 0.0;
        m.jitter = value_or<double>(doc, "jitter", dj);
        if (cfg.experiment == "weights" && !m.kernel)
            throw ConfigError("'weights' needs a 'kernel'");
        cfg.methods = {m};
    }

    if (cfg.experiment == "transform") {
        if (cfg.methods.size() != 1)
            throw ConfigError("'transform' needs exactly one 'method'");
        if (!doc.contains("mean") || !doc.contains("cov"))
            throw ConfigError("'transform' needs 'mean' and 'cov'");
        cfg.mean = to_vector(doc.at("mean"), "mean");
        cfg.cov = to_matrix(doc.at("cov"), "cov");
        if (cfg.cov.rows() != cfg.mean.size() || cfg.cov.cols() != cfg.mean.size())
            throw ConfigError("'cov' must be square with the dimension of 'mean'");
        cfg.dim = static_cast<int>(cfg.mean.size());
        const json fn = doc.value("function", json{{"name", "identity"}});
        cfg.function = fn.is_string() ? fn.get<std::string>() : value_or<std::string>(fn, "name", "identity");
        cfg.function_exponent = value_or<double>(fn, "p", 1.0);
        cfg.function_time = value_or<int>(fn, "k", 1);
        if (doc.contains("noise"))
            cfg.noise = to_matrix(doc.at("noise"), "noise");
        transform_function(cfg); // validates the name
    }

    if (cfg.experiment == "moments") {
        cfg.dims = value_or<std::vector<int>>(doc, "dims", {2, 5, 10});
        cfg.exponents = value_or<std::vector<double>>(doc, "exponents", {1.0, -2.0, -3.0, -5.0});
        for (int d : cfg.dims)
            if (d < 1)
                throw ConfigError("'dims' entries must be >= 1");
        if (doc.contains("truth")) {
            const json &t = doc.at("truth");
            cfg.truth_samples = value_or<std::uint64_t>(t, "samples", cfg.truth_samples);
            cfg.truth_seed = value_or<std::uint64_t>(t, "seed", cfg.truth_seed);
            cfg.cache_dir = value_or<std::string>(t, "cache_dir", "");
        }
        if (cfg.truth_samples < 2)
            throw ConfigError("'truth.samples' must be >= 2");
        if (cfg.methods.empty())
            throw ConfigError("'moments' needs at least one method");
    }

    if (cfg.experiment == "ungm" || cfg.experiment == "bot") {
        if (cfg.methods.empty())
            throw ConfigError("'" + cfg.experiment + "' needs at least one method");
        if (cfg.seeds.empty())
            throw ConfigError("'" + cfg.experiment + "' needs a non-empty 'seeds'");
        if (cfg.steps < 1)
            throw ConfigError("'" + cfg.experiment + "' needs 'steps' >= 1");
    }

    if (cfg.experiment == "bot" && doc.contains("bot")) {
        const json &b = doc.at("bot");
        if (b.contains("sensors")) {
            const Eigen::MatrixXd s = to_matrix(b.at("sensors"), "bot.sensors");
            if (s.rows() != 4 || s.cols() != 2)
                throw ConfigError("'bot.sensors' must list exactly four [x, y] pairs");
            for (int i = 0; i < 4; ++i)
                cfg.bot.sensors[static_cast<std::size_t>(i)] = s.row(i).transpose();
        }
        cfg.bot.bearing_std = value_or<double>(b, "bearing_std", cfg.bot.bearing_std);
        cfg.bot.dt = value_or<double>(b, "dt", cfg.bot.dt);
        cfg.bot.q1 = value_or<double>(b, "q1", cfg.bot.q1);
        cfg.bot.q2 = value_or<double>(b, "q2", cfg.bot.q2);
        if (b.contains("prior")) {
            const json &p = b.at("prior");
            if (p.contains("mean"))
                cfg.bot.prior.mean = to_vector(p.at("mean"), "bot.prior.mean");
            if (p.contains("cov"))
                cfg.bot.prior.cov = to_matrix(p.at("cov"), "bot.prior.cov");
            else if (p.contains("std"))
                cfg.bot.prior.cov =
                    to_vector(p.at("std"), "bot.prior.std").array().square().matrix().asDiagonal();
        }
        try {
            cfg.bot.validate();
        } catch (const std::exception &e) {
            throw ConfigError(e.what());
        }
    }

    if (cfg.format != "csv" && cfg.format != "json")
        throw ConfigError("output format must be csv or json");
    return cfg;
}

ExperimentConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open configuration '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception &e) {
        throw ConfigError("configuration '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

std::string to_csv(const Table &table)
{
    std::ostringstream os;
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        os << (c ? "," : "") << csv_escape(table.columns[c]);
    os << "\n";
    for (const auto &row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            os << (c ? "," : "") << format_cell(row[c]);
        os << "\n";
    }
    return os.str();
}

json to_json(const Table &table)
{
    json rows = json::array();
    for (const auto &row : table.rows) {
        json r = json::object();
        for (std::size_t c = 0; c < row.size() && c < table.columns.size(); ++c)
            r[table.columns[c]] = cell_json(row[c]);
        rows.push_back(std::move(r));
    }
    return json{{"columns", table.columns}, {"rows", rows}, {"metadata", table.metadata}};
}

// ---------------------------------------------------------------------------
// KL divergence
// ---------------------------------------------------------------------------

double kl_gauss(const GaussianState &p, const GaussianState &q)
{
    const auto n = p.mean.size();
    if (q.mean.size() != n || p.cov.rows() != n || q.cov.rows() != n)
        throw DimensionError("kl_gauss: dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> lp(p.cov), lq(q.cov);
    if (lp.info() != Eigen::Success || lq.info() != Eigen::Success ||
        lp.matrixLLT().diagonal().minCoeff() <= 0.0 || lq.matrixLLT().diagonal().minCoeff() <= 0.0)
        throw NumericalError("kl_gauss: covariance is not positive definite");
    const Eigen::VectorXd dm = q.mean - p.mean;
    const double trace = lq.solve(p.cov).trace();
    const double maha = dm.dot(lq.solve(dm));
    const double logdet_p = 2.0 * lp.matrixLLT().diagonal().array().log().sum();
    const double logdet_q = 2.0 * lq.matrixLLT().diagonal().array().log().sum();
    const double kl = 0.5 * (trace + maha - static_cast<double>(n) + logdet_q - logdet_p);
    return std::max(kl, 0.0);
}

// ---------------------------------------------------------------------------
// Moments experiment
// ---------------------------------------------------------------------------

MomentsTruth moments_truth(int n, double p, std::uint64_t samples, std::uint64_t seed,
                           const std::string &cache_dir)
{
    namespace fs = std::filesystem;
    fs::path cache_file;
    if (!cache_dir.empty()) {
        std::ostringstream name;
        name << "moments_n" << n << "_p" << format_double(p) << "_seed" << seed << "_samples"
             << samples << ".json";
        cache_file = fs::path(cache_dir) / name.str();
        std::ifstream in(cache_file);
        if (in) {
            try {
                json j;
                in >> j;
                return {n, p, j.at("mean").get<double>(), j.at("variance").get<double>()};
            } catch (const json::exception &) {
                // unreadable cache entry: recompute and overwrite
            }
        }
    }

    std::mt19937_64 rng(seed);
    std::chi_squared_distribution<double> radius2(static_cast<double>(n));
    long double s1 = 0.0L, s2 = 0.0L;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double y = std::pow(1.0 + radius2(rng), 0.5 * p);
        s1 += y;
        s2 += static_cast<long double>(y) * y;
    }
    const long double mean = s1 / samples;
    MomentsTruth t{n, p, static_cast<double>(mean), static_cast<double>(s2 / samples - mean * mean)};

    if (!cache_file.empty()) {
        std::error_code ec;
        fs::create_directories(cache_file.parent_path(), ec);
        std::ofstream out(cache_file);
        if (out)
            out << json{{"dim", n}, {"exponent", p}, {"seed", seed}, {"samples", samples},
                        {"mean", t.mean}, {"variance", t.variance}}
                       .dump(2);
    }
    return t;
}

const MomentsCell *MomentsReport::find(const std::string &method, int dim, double exponent) const
{
    for (const auto &c : cells)
        if (c.method == method && c.dim == dim && c.exponent == exponent)
            return &c;
    return nullptr;
}

bool MomentsReport::all_failed() const
{
    return std::none_of(cells.begin(), cells.end(), [](const MomentsCell &c) { return c.kl.has_value(); });
}

MomentsReport run_moments(const ExperimentConfig &cfg)
{
    const auto started = std::chrono::steady_clock::now();
    MomentsReport report;

    // Ground truths are independent per (n, p).
    std::vector<std::pair<int, double>> keys;
    for (int n : cfg.dims)
        for (double p : cfg.exponents)
            keys.emplace_back(n, p);
    report.truths.resize(keys.size());
    parallel_for(keys.size(), thread_count(cfg, keys.size()), [&](std::size_t i) {
        report.truths[i] = moments_truth(keys[i].first, keys[i].second, cfg.truth_samples,
                                         cfg.truth_seed, cfg.cache_dir);
    });

    std::size_t key = 0;
    for (int n : cfg.dims) {
        std::vector<std::optional<QuadratureRule>> rules(cfg.methods.size());
        std::vector<std::string> build_errors(cfg.methods.size());
        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
            try {
                rules[m] = build_rule(cfg.methods[m], n);
            } catch (const ConfigError &) {
                throw;
            } catch (const std::exception &e) {
                build_errors[m] = std::string("rule construction failed: ") + e.what();
            }
        }
        for (double p : cfg.exponents) {
            const MomentsTruth &truth = report.truths[key++];
            const MomentIntegrand mi = moment_integrand(p);
            for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
                MomentsCell cell;
                cell.method = cfg.methods[m].name;
                cell.dim = n;
                cell.exponent = p;
                cell.mean = cell.variance = std::numeric_limits<double>::quiet_NaN();
                if (!rules[m]) {
                    cell.error = build_errors[m];
                    report.cells.push_back(std::move(cell));
                    continue;
                }
                try {
                    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
                    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
                    const VectorFunction g = [&](const Eigen::VectorXd &x) {
                        Eigen::VectorXd v(2);
                        v << mi.y(x), mi.y_squared(x);
                        return v;
                    };
                    const Eigen::VectorXd est = apply_rule(*rules[m], g, zero, eye);
                    cell.mean = est(0);
                    cell.variance = est(1) - est(0) * est(0);
                    if (!(cell.variance > 0.0))
                        throw NumericalError("non-positive variance estimate " +
                                             format_double(cell.variance));
                    cell.kl = kl_gauss(
                        {Eigen::VectorXd::Constant(1, cell.mean),
                         Eigen::MatrixXd::Constant(1, 1, cell.variance)},
                        {Eigen::VectorXd::Constant(1, truth.mean),
                         Eigen::MatrixXd::Constant(1, 1, truth.variance)});
                } catch (const std::exception &e) {
                    cell.error = e.what();
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    report.metadata = base_metadata(cfg);
    report.metadata["experiment"] = "moments";
    report.metadata["kl_direction"] = "KL(method || truth)";
    report.metadata["truth"] = {{"samples", cfg.truth_samples},
                                {"seed", cfg.truth_seed},
                                {"method", "Monte Carlo over x^T x ~ chi^2_n"}};
    report.metadata["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

Table to_table(const MomentsReport &report)
{
    Table t;
    t.columns = {"method", "dim", "p", "mean_estimate", "variance_estimate",
                 "truth_mean", "truth_variance", "kl", "error"};
    for (const auto &c : report.cells) {
        const MomentsTruth *truth = nullptr;
        for (const auto &tr : report.truths)
            if (tr.dim == c.dim && tr.exponent == c.exponent)
                truth = &tr;
        std::vector<Cell> row{c.method, static_cast<long>(c.dim), c.exponent};
        row.emplace_back(std::isfinite(c.mean) ? Cell(c.mean) : Cell(std::string("error")));
        row.emplace_back(std::isfinite(c.variance) ? Cell(c.variance) : Cell(std::string("error")));
        row.emplace_back(truth ? truth->mean : std::numeric_limits<double>::quiet_NaN());
        row.emplace_back(truth ? truth->variance : std::numeric_limits<double>::quiet_NaN());
        row.emplace_back(c.kl ? Cell(*c.kl) : Cell(std::string("error")));
        row.emplace_back(c.error);
        t.rows.push_back(std::move(row));
    }
    t.metadata = report.metadata;
    return t;
}

// ---------------------------------------------------------------------------
// Filtering experiments
// ---------------------------------------------------------------------------

const MethodResult *MonteCarloReport::find(const std::string &name) const
{
    for (const auto &m : methods)
        if (m.name == name)
            return &m;
    return nullptr;
}

bool MonteCarloReport::all_failed() const
{
    return std::all_of(methods.begin(), methods.end(),
                       [](const MethodResult &m) { return m.filter.ok == 0; });
}

MonteCarloReport run_ungm(const ExperimentConfig &cfg)
{
    return run_monte_carlo(
        cfg, ungm_model(),
        [](const Eigen::VectorXd &x, const Eigen::VectorXd &m) { return (x - m).squaredNorm(); },
        "ungm");
}

MonteCarloReport run_bot(const ExperimentConfig &cfg)
{
    return run_monte_carlo(
        cfg, bot_model(cfg.bot),
        [](const Eigen::VectorXd &x, const Eigen::VectorXd &m) {
            const double dx = x(0) - m(0);
            const double dy = x(2) - m(2);
            return dx * dx + dy * dy;
        },
        "bot");
}

Table to_table(const MonteCarloReport &report)
{
    Table t;
    t.columns = {"method", "estimator", "rmse_mean", "rmse_std", "seeds_ok", "seeds_failed",
                 "error"};
    for (const auto &m : report.methods) {
        for (const auto &[label, s] : {std::pair<std::string, const RmseSummary *>{"filter", &m.filter},
                                        {"smoother", &m.smoother}}) {
            std::vector<Cell> row{m.name, label};
            if (s->ok > 0) {
                row.emplace_back(s->mean);
                row.emplace_back(s->std);
            } else {
                row.emplace_back(std::string("error"));
                row.emplace_back(std::string("error"));
            }
            row.emplace_back(static_cast<long>(s->ok));
            row.emplace_back(static_cast<long>(s->failed));
            row.emplace_back(m.error);
            t.rows.push_back(std::move(row));
        }
    }
    t.metadata = report.metadata;
    return t;
}

// ---------------------------------------------------------------------------
// Point, weight and transform emission
// ---------------------------------------------------------------------------

Table run_points(const ExperimentConfig &cfg)
{
    const MethodSpec &m = cfg.methods.at(0);
    const QuadratureRule rule = build_rule(m, cfg.dim);
    Table t;
    for (int d = 0; d < rule.dim(); ++d)
        t.columns.push_back("xi_" + std::to_string(d + 1));
    if (cfg.include_weights)
        t.columns.push_back("weight");
    for (int i = 0; i < rule.size(); ++i) {
        std::vector<Cell> row;
        for (int d = 0; d < rule.dim(); ++d)
            row.emplace_back(rule.points.points(d, i));
        if (cfg.include_weights)
            row.emplace_back(rule.weights(i));
        t.rows.push_back(std::move(row));
    }
    t.metadata = base_metadata(cfg);
    t.metadata["family"] = to_string(rule.points.family);
    t.metadata["weights"] = m.kernel ? "gpq" : "classical";
    return t;
}

Table run_weights(const ExperimentConfig &cfg)
{
    const MethodSpec &m = cfg.methods.at(0);
    const QuadratureRule rule = build_rule(m, cfg.dim);
    const double variance = rule.posterior_variance.value_or(std::numeric_limits<double>::quiet_NaN());
    Table t;
    t.columns.push_back("index");
    for (int d = 0; d < rule.dim(); ++d)
        t.columns.push_back("xi_" + std::to_string(d + 1));
    t.columns.push_back("weight");
    t.columns.push_back("posterior_variance");
    for (int i = 0; i < rule.size(); ++i) {
        std::vector<Cell> row{static_cast<long>(i)};
        for (int d = 0; d < rule.dim(); ++d)
            row.emplace_back(rule.points.points(d, i));
        row.emplace_back(rule.weights(i));
        row.emplace_back(variance);
        t.rows.push_back(std::move(row));
    }
    t.metadata = base_metadata(cfg);
    t.metadata["kernel"] = m.kernel->build(cfg.dim).description();
    t.metadata["jitter"] = m.jitter;
    t.metadata["posterior_variance"] = variance;
    return t;
}

Table run_transform(const ExperimentConfig &cfg)
{
    const MethodSpec &m = cfg.methods.at(0);
    const QuadratureRule rule = build_rule(m, cfg.dim);
    const VectorFunction g = transform_function(cfg);
    const Eigen::VectorXd probe = g(cfg.mean);
    const Eigen::MatrixXd noise =
        cfg.noise.size() ? cfg.noise : Eigen::MatrixXd::Zero(probe.size(), probe.size());
    const TransformResult r = gp_transform(rule, g, cfg.mean, cfg.cov, noise);

    Table t;
    t.columns = {"quantity", "row", "col", "value"};
    for (Eigen::Index i = 0; i < r.mean.size(); ++i)
        t.rows.push_back({std::string("mean"), static_cast<long>(i), 0L, r.mean(i)});
    for (Eigen::Index i = 0; i < r.cov.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cov.cols(); ++j)
            t.rows.push_back({std::string("cov"), static_cast<long>(i), static_cast<long>(j), r.cov(i, j)});
    for (Eigen::Index i = 0; i < r.cross_cov.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cross_cov.cols(); ++j)
            t.rows.push_back({std::string("cross_cov"), static_cast<long>(i), static_cast<long>(j),
                              r.cross_cov(i, j)});
    t.metadata = base_metadata(cfg);
    t.metadata["method"] = m.name;
    t.metadata["function"] = cfg.function;
    return t;
}

} // namespace gpq
