#include "gpq/models.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "gpq/errors.hpp"

namespace gpq {

double ungm_transition(double x, int k)
{
    return 0.5 * x + 25.0 * x / (1.0 + x * x) + 8.0 * std::cos(1.2 * k);
}

double ungm_measurement(double x)
{
    return x * x / 20.0;
}

StateSpaceModel ungm_model()
{
    StateSpaceModel m;
    m.transition = [](const Eigen::VectorXd &x, int k) {
        return Eigen::VectorXd::Constant(1, ungm_transition(x(0), k));
    };
    m.measurement = [](const Eigen::VectorXd &x, int) {
        return Eigen::VectorXd::Constant(1, ungm_measurement(x(0)));
    };
    m.process_noise = [](int) { return Eigen::MatrixXd::Constant(1, 1, 10.0); };
    m.measurement_noise = [](int) { return Eigen::MatrixXd::Constant(1, 1, 1.0); };
    m.prior = {Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 5.0)};
    m.measurement_dim = 1;
    return m;
}

GaussianState BotConfig::default_prior()
{
    GaussianState prior;
    prior.mean.resize(5);
    prior.mean << 0.0, 10.0, 0.0, 0.0, 0.05;
    prior.cov = Eigen::VectorXd((Eigen::VectorXd(5) << 50.0 * 50.0, 2.0 * 2.0, 50.0 * 50.0,
                                 2.0 * 2.0, 0.01 * 0.01)
                                    .finished())
                    .asDiagonal();
    return prior;
}

void BotConfig::validate() const
{
    if (!(bearing_std > 0.0))
        throw std::invalid_argument("BotConfig: bearing_std must be positive");
    if (!(dt > 0.0))
        throw std::invalid_argument("BotConfig: dt must be positive");
    if (q1 < 0.0 || q2 < 0.0)
        throw std::invalid_argument("BotConfig: noise intensities must be non-negative");
    if (prior.mean.size() != 5 || prior.cov.rows() != 5 || prior.cov.cols() != 5)
        throw DimensionError("BotConfig: prior must be five-dimensional");
}

Eigen::VectorXd coordinated_turn(const Eigen::VectorXd &x, double dt)
{
    if (x.size() != 5)
        throw DimensionError("coordinated_turn: state must have five components");
    const double w = x(4);
    const double wt = w * dt;
    double sin_over_w, one_minus_cos_over_w;
    if (std::abs(wt) < 1e-6) {
        // Series of sin(w dt)/w and (1 - cos(w dt))/w around w = 0.
        sin_over_w = dt * (1.0 - wt * wt / 6.0);
        one_minus_cos_over_w = w * dt * dt / 2.0;
    } else {
        sin_over_w = std::sin(wt) / w;
        one_minus_cos_over_w = (1.0 - std::cos(wt)) / w;
    }
    const double c = std::cos(wt);
    const double s = std::sin(wt);

    Eigen::VectorXd out(5);
    out(0) = x(0) + sin_over_w * x(1) - one_minus_cos_over_w * x(3);
    out(1) = c * x(1) - s * x(3);
    out(2) = one_minus_cos_over_w * x(1) + x(2) + sin_over_w * x(3);
    out(3) = s * x(1) + c * x(3);
    out(4) = w;
    return out;
}

Eigen::MatrixXd coordinated_turn_noise(double q1, double q2, double dt)
{
    Eigen::Matrix2d block;
    block << q1 * dt * dt * dt / 3.0, q1 * dt * dt / 2.0, q1 * dt * dt / 2.0, q1 * dt;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(5, 5);
    q.block<2, 2>(0, 0) = block;
    q.block<2, 2>(2, 2) = block;
    q(4, 4) = q2 * dt;
    return q;
}

Eigen::VectorXd bearings(const Eigen::VectorXd &x, const std::array<Eigen::Vector2d, 4> &sensors)
{
    Eigen::VectorXd theta(4);
    for (int i = 0; i < 4; ++i)
        theta(i) = std::atan2(x(2) - sensors[static_cast<std::size_t>(i)](1),
                              x(0) - sensors[static_cast<std::size_t>(i)](0));
    return theta;
}

StateSpaceModel bot_model(const BotConfig &cfg)
{
    cfg.validate();
    StateSpaceModel m;
    const double dt = cfg.dt;
    const auto sensors = cfg.sensors;
    const Eigen::MatrixXd q = coordinated_turn_noise(cfg.q1, cfg.q2, cfg.dt);
    const Eigen::MatrixXd r =
        Eigen::MatrixXd::Identity(4, 4) * (cfg.bearing_std * cfg.bearing_std);
    m.transition = [dt](const Eigen::VectorXd &x, int) { return coordinated_turn(x, dt); };
    m.measurement = [sensors](const Eigen::VectorXd &x, int) { return bearings(x, sensors); };
    m.process_noise = [q](int) { return q; };
    m.measurement_noise = [r](int) { return r; };
    m.prior = cfg.prior;
    m.measurement_dim = 4;
    return m;
}

MomentIntegrand moment_integrand(double p)
{
    MomentIntegrand mi;
    mi.exponent = p;
    mi.standard_exponent = p == 1.0 || p == -2.0 || p == -3.0 || p == -5.0;
    mi.y = [p](const Eigen::VectorXd &x) { return std::pow(1.0 + x.squaredNorm(), 0.5 * p); };
    mi.y_squared = [p](const Eigen::VectorXd &x) { return std::pow(1.0 + x.squaredNorm(), p); };
    return mi;
}

Trajectory simulate(const StateSpaceModel &model, int steps, std::uint64_t seed)
{
    if (steps < 1)
        throw std::invalid_argument("simulate: steps must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&](const Eigen::MatrixXd &cov) {
        Eigen::VectorXd z(cov.rows());
        for (Eigen::Index i = 0; i < z.size(); ++i)
            z(i) = normal(rng);
        return Eigen::VectorXd(matrix_sqrt(cov).factor * z);
    };

    Trajectory t;
    t.seed = seed;
    t.states.reserve(static_cast<std::size_t>(steps) + 1);
    t.measurements.reserve(static_cast<std::size_t>(steps));
    t.states.push_back(model.prior.mean + draw(model.prior.cov));
    for (int k = 1; k <= steps; ++k) {
        Eigen::VectorXd x = model.transition(t.states.back(), k) + draw(model.process_noise(k));
        Eigen::VectorXd y = model.measurement(x, k) + draw(model.measurement_noise(k));
        if (!x.allFinite() || !y.allFinite()) {
            std::ostringstream os;
            os << "simulate: non-finite state or measurement at k=" << k << " (seed " << seed
               << ")";
            throw NumericalError(os.str());
        }
        t.states.push_back(std::move(x));
        t.measurements.push_back(std::move(y));
    }
    return t;
}

std::string trajectory_csv(const Trajectory &t)
{
    const Eigen::Index n = t.states.empty() ? 0 : t.states.front().size();
    const Eigen::Index d = t.measurements.empty() ? 0 : t.measurements.front().size();
    std::string out = "k";
    for (Eigen::Index i = 1; i <= n; ++i)
        out += ",x_" + std::to_string(i);
    for (Eigen::Index i = 1; i <= d; ++i)
        out += ",y_" + std::to_string(i);
    out += '\n';
    char buf[32];
    for (std::size_t k = 0; k < t.states.size(); ++k) {
        out += std::to_string(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof buf, ",%.17g", t.states[k](i));
            out += buf;
        }
        for (Eigen::Index i = 0; i < d; ++i) {
            if (k == 0) {
                out += ',';
                continue;
            }
            std::snprintf(buf, sizeof buf, ",%.17g", t.measurements[k - 1](i));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace gpq
