#include "gpq/points.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gpq/errors.hpp"
#include "gpq/hermite.hpp"
#include "gpq/normal.hpp"

namespace gpq {

namespace {

void require_dim(int n, const char *what)
{
    if (n < 1)
        throw std::invalid_argument(std::string(what) + ": dimension must be >= 1");
}

std::vector<int> first_primes(int count)
{
    std::vector<int> primes;
    for (int c = 2; static_cast<int>(primes.size()) < count; ++c) {
        bool prime = true;
        for (int p : primes) {
            if (p * p > c)
                break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime)
            primes.push_back(c);
    }
    return primes;
}

double radical_inverse(long i, int base)
{
    double inv_base = 1.0 / base;
    double factor = inv_base;
    double result = 0.0;
    while (i > 0) {
        result += static_cast<double>(i % base) * factor;
        i /= base;
        factor *= inv_base;
    }
    return result;
}

} // namespace

std::string to_string(PointFamily family)
{
    switch (family) {
    case PointFamily::UT: return "ut";
    case PointFamily::Cubature: return "cubature";
    case PointFamily::Symmetric5: return "symmetric5";
    case PointFamily::GaussHermite: return "gauss-hermite";
    case PointFamily::Random: return "random";
    case PointFamily::Hammersley: return "hammersley";
    case PointFamily::Optimized: return "optimized";
    case PointFamily::Custom: return "custom";
    }
    return "unknown";
}

void UnitPointSet::validate() const
{
    if (points.rows() < 1 || points.cols() < 1)
        throw std::invalid_argument("point set must contain at least one point of dimension >= 1");
    if (!points.allFinite())
        throw std::invalid_argument("point set contains non-finite coordinates");
}

ClassicalRule ut_points(int n, double kappa)
{
    require_dim(n, "ut_points");
    if (!(n + kappa > 0.0))
        throw std::invalid_argument("ut_points: n + kappa must be positive");
    const double radius = std::sqrt(n + kappa);
    ClassicalRule rule;
    rule.points.family = PointFamily::UT;
    rule.points.parameter = kappa;
    rule.points.points = Eigen::MatrixXd::Zero(n, 2 * n + 1);
    rule.weights = Eigen::VectorXd::Constant(2 * n + 1, 1.0 / (2.0 * (n + kappa)));
    rule.weights(0) = kappa / (n + kappa);
    for (int i = 0; i < n; ++i) {
        rule.points.points(i, 1 + i) = radius;
        rule.points.points(i, 1 + n + i) = -radius;
    }
    return rule;
}

ClassicalRule cubature_points(int n)
{
    require_dim(n, "cubature_points");
    const double radius = std::sqrt(static_cast<double>(n));
    ClassicalRule rule;
    rule.points.family = PointFamily::Cubature;
    rule.points.points = Eigen::MatrixXd::Zero(n, 2 * n);
    rule.weights = Eigen::VectorXd::Constant(2 * n, 1.0 / (2.0 * n));
    for (int i = 0; i < n; ++i) {
        rule.points.points(i, i) = radius;
        rule.points.points(i, n + i) = -radius;
    }
    return rule;
}

ClassicalRule symmetric5_points(int n)
{
    if (n < 2)
        throw std::invalid_argument("symmetric5_points: dimension must be >= 2");
    const double lambda = std::sqrt(3.0);
    const int count = 2 * n * n + 1;

    ClassicalRule rule;
    rule.points.family = PointFamily::Symmetric5;
    rule.points.points = Eigen::MatrixXd::Zero(n, count);
    std::vector<int> generator(static_cast<std::size_t>(count), 0);
    int col = 1;
    for (int i = 0; i < n; ++i) {
        for (double sign : {1.0, -1.0}) {
            rule.points.points(i, col) = sign * lambda;
            generator[static_cast<std::size_t>(col++)] = 1;
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            for (double si : {1.0, -1.0}) {
                for (double sj : {1.0, -1.0}) {
                    rule.points.points(i, col) = si * lambda;
                    rule.points.points(j, col) = sj * lambda;
                    generator[static_cast<std::size_t>(col++)] = 2;
                }
            }
        }
    }

    // Moment equations for the generator weights (w0, w1, w2) against
    // E[1] = 1, E[x1^2] = 1, E[x1^2 x2^2] = 1 and E[x1^4] = 3.
    Eigen::Matrix<double, 4, 3> a = Eigen::Matrix<double, 4, 3>::Zero();
    const Eigen::Vector4d moments(1.0, 1.0, 1.0, 3.0);
    for (int c = 0; c < count; ++c) {
        const Eigen::VectorXd x = rule.points.points.col(c);
        const int g = generator[static_cast<std::size_t>(c)];
        a(0, g) += 1.0;
        a(1, g) += x(0) * x(0);
        a(2, g) += x(0) * x(0) * x(1) * x(1);
        a(3, g) += std::pow(x(0), 4);
    }
    const Eigen::Vector3d w = a.topRows<3>().fullPivLu().solve(moments.head<3>());
    const double residual = (a * w - moments).cwiseAbs().maxCoeff();
    if (!w.allFinite() || residual > 1e-12)
        throw NumericalError("symmetric5_points: moment equations are inconsistent");

    rule.weights.resize(count);
    for (int c = 0; c < count; ++c)
        rule.weights(c) = w(generator[static_cast<std::size_t>(c)]);
    return rule;
}

ClassicalRule gauss_hermite_points(int n, int order)
{
    require_dim(n, "gauss_hermite_points");
    if (order < 1)
        throw std::invalid_argument("gauss_hermite_points: order must be >= 1");
    if (std::pow(static_cast<double>(order), n) > static_cast<double>(kMaxTensorPoints))
        throw std::invalid_argument("gauss_hermite_points: P^n exceeds the cap of " +
                                    std::to_string(kMaxTensorPoints) + " points");
    const GaussHermite1D base = gauss_hermite_1d(order);
    long count = 1;
    for (int d = 0; d < n; ++d)
        count *= order;

    ClassicalRule rule;
    rule.points.family = PointFamily::GaussHermite;
    rule.points.parameter = order;
    rule.points.points.resize(n, count);
    rule.weights.resize(count);
    std::vector<int> digit(static_cast<std::size_t>(n), 0);
    for (long c = 0; c < count; ++c) {
        double w = 1.0;
        for (int d = 0; d < n; ++d) {
            rule.points.points(d, c) = base.roots(digit[static_cast<std::size_t>(d)]);
            w *= base.weights(digit[static_cast<std::size_t>(d)]);
        }
        rule.weights(c) = w;
        for (int d = n - 1; d >= 0; --d) {
            if (++digit[static_cast<std::size_t>(d)] < order)
                break;
            digit[static_cast<std::size_t>(d)] = 0;
        }
    }
    return rule;
}

Eigen::MatrixXd hammersley_unit(int n, int count)
{
    require_dim(n, "hammersley_unit");
    if (count < 1)
        throw std::invalid_argument("hammersley_unit: count must be >= 1");
    const std::vector<int> primes = first_primes(n - 1);
    Eigen::MatrixXd u(n, count);
    for (int i = 0; i < count; ++i) {
        u(0, i) = (i + 0.5) / count;
        for (int d = 1; d < n; ++d)
            u(d, i) = radical_inverse(i, primes[static_cast<std::size_t>(d - 1)]);
    }
    return u;
}

UnitPointSet hammersley_points(int n, int count)
{
    Eigen::MatrixXd u = hammersley_unit(n, count);
    const std::vector<int> primes = first_primes(n - 1);
    for (int d = 1; d < n; ++d) {
        const int base = primes[static_cast<std::size_t>(d - 1)];
        double cells = 1.0;
        while (cells < count)
            cells *= base;
        u.row(d).array() += 0.5 / cells;
    }
    UnitPointSet set;
    set.family = PointFamily::Hammersley;
    set.points = u.unaryExpr([](double v) { return normal_quantile(v); });
    return set;
}

UnitPointSet random_points(int n, int count, std::uint64_t seed)
{
    require_dim(n, "random_points");
    if (count < 1)
        throw std::invalid_argument("random_points: count must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    UnitPointSet set;
    set.family = PointFamily::Random;
    set.parameter = static_cast<double>(seed);
    set.points.resize(n, count);
    for (int i = 0; i < count; ++i)
        for (int d = 0; d < n; ++d)
            set.points(d, i) = normal(rng);
    return set;
}

ClassicalRule equal_weight_rule(UnitPointSet points)
{
    points.validate();
    ClassicalRule rule;
    rule.weights = Eigen::VectorXd::Constant(points.size(), 1.0 / points.size());
    rule.points = std::move(points);
    return rule;
}

} // namespace gpq
