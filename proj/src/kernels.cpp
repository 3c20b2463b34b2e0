#include "gpq/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gpq/errors.hpp"
#include "kernel_impl.hpp"

namespace gpq {

namespace {

void check_point(const Kernel &k, const Eigen::VectorXd &xi, const char *what)
{
    if (!xi.allFinite())
        throw std::invalid_argument(std::string(what) + ": non-finite point");
    k.check_dimension(static_cast<int>(xi.size()));
}

Eigen::MatrixXd as_column(const Eigen::VectorXd &v)
{
    return Eigen::MatrixXd(v);
}

} // namespace

Kernel Kernel::squared_exponential(double scale, double length_scale)
{
    if (!(scale > 0.0) || !(length_scale > 0.0) || !std::isfinite(scale) ||
        !std::isfinite(length_scale))
        throw std::invalid_argument("squared exponential kernel needs s > 0 and l > 0");
    return Kernel(SquaredExponential{scale, length_scale});
}

Kernel Kernel::hermite_polynomial(std::vector<MultiIndex> indices)
{
    const auto m = static_cast<Eigen::Index>(indices.size());
    HermitePolynomial hp;
    hp.lambda = Eigen::MatrixXd::Identity(m, m);
    hp.indices = std::move(indices);
    hp.identity_lambda = true;
    if (hp.indices.empty())
        throw std::invalid_argument("Hermite kernel needs a non-empty index set");
    hp.dim = static_cast<int>(hp.indices.front().size());
    for (const auto &idx : hp.indices)
        if (static_cast<int>(idx.size()) != hp.dim)
            throw DimensionError("Hermite kernel index set mixes dimensions");
    return Kernel(std::move(hp));
}

Kernel Kernel::hermite_polynomial(std::vector<MultiIndex> indices, Eigen::MatrixXd lambda)
{
    Kernel k = hermite_polynomial(std::move(indices));
    auto &hp = std::get<HermitePolynomial>(k.kernel_);
    const auto m = static_cast<Eigen::Index>(hp.indices.size());
    if (lambda.rows() != m || lambda.cols() != m)
        throw DimensionError("coefficient matrix must be square with one row per multi-index");
    const double norm = std::max(1.0, lambda.cwiseAbs().maxCoeff());
    if ((lambda - lambda.transpose()).cwiseAbs().maxCoeff() > 1e-12 * norm)
        throw std::invalid_argument("coefficient matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lambda, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12 * norm)
        throw std::invalid_argument("coefficient matrix must be positive semi-definite");
    hp.identity_lambda = lambda.isIdentity(0.0);
    hp.lambda = std::move(lambda);
    return k;
}

int Kernel::dimension() const
{
    if (const auto *hp = hermite_polynomial_params())
        return hp->dim;
    return 0;
}

void Kernel::check_dimension(int n) const
{
    if (n < 1)
        throw DimensionError("kernel dimension must be >= 1");
    const int d = dimension();
    if (d != 0 && d != n)
        throw DimensionError("kernel built for dimension " + std::to_string(d) +
                             " used with points of dimension " + std::to_string(n));
}

std::string Kernel::description() const
{
    std::ostringstream os;
    if (const auto *se = squared_exponential_params()) {
        os << "squared-exponential(s=" << se->scale << ", l=" << se->length_scale << ")";
    } else {
        const auto &hp = *hermite_polynomial_params();
        os << "hermite-polynomial(n=" << hp.dim << ", terms=" << hp.indices.size()
           << (hp.identity_lambda ? ", lambda=I)" : ", lambda=custom)");
    }
    return os.str();
}

double kernel_eval(const Kernel &k, const Eigen::VectorXd &xi, const Eigen::VectorXd &xi_prime)
{
    if (xi.size() != xi_prime.size())
        throw DimensionError("kernel_eval: points of different dimension");
    check_point(k, xi, "kernel_eval");
    check_point(k, xi_prime, "kernel_eval");

    if (const auto *se = k.squared_exponential_params()) {
        const double d2 = (xi - xi_prime).squaredNorm();
        return se->scale * se->scale * std::exp(-d2 / (2.0 * se->length_scale * se->length_scale));
    }
    const auto &hp = *k.hermite_polynomial_params();
    const Eigen::VectorXd a = detail::hermite_features<double>(hp, as_column(xi)).row(0).transpose();
    const Eigen::VectorXd b =
        detail::hermite_features<double>(hp, as_column(xi_prime)).row(0).transpose();
    if (hp.identity_lambda)
        return a.cwiseProduct(b).sum();
    return a.dot(hp.lambda * b);
}

double kernel_mean_embedding(const Kernel &k, const Eigen::VectorXd &xi)
{
    check_point(k, xi, "kernel_mean_embedding");
    return detail::embeddings<double>(k, as_column(xi))(0);
}

double kernel_double_integral(const Kernel &k, int n)
{
    k.check_dimension(n);
    return detail::double_integral<double>(k, n);
}

Eigen::MatrixXd gram_matrix(const Kernel &k, const Eigen::MatrixXd &points)
{
    k.check_dimension(static_cast<int>(points.rows()));
    return detail::gram<double>(k, points);
}

Eigen::VectorXd mean_embeddings(const Kernel &k, const Eigen::MatrixXd &points)
{
    k.check_dimension(static_cast<int>(points.rows()));
    return detail::embeddings<double>(k, points);
}

Kernel make_ut_kernel(int n, int order)
{
    if (order != 3 && order != 5 && order != 7 && order != 9)
        throw std::invalid_argument("make_ut_kernel: unsupported order " + std::to_string(order) +
                                    " (expected 3, 5, 7 or 9)");
    return Kernel::hermite_polynomial(enumerate_indices(n, IndexConstraint::TotalDegree, order));
}

Kernel make_gh_kernel(int n, int order)
{
    if (order < 1)
        throw std::invalid_argument("make_gh_kernel: order must be >= 1");
    if (n < 1)
        throw std::invalid_argument("make_gh_kernel: dimension must be >= 1");
    const double count = std::pow(2.0 * order, n);
    if (count > static_cast<double>(kMaxKernelIndices))
        throw std::invalid_argument("make_gh_kernel: (2P)^n = " + std::to_string(count) +
                                    " exceeds the cap of " + std::to_string(kMaxKernelIndices) +
                                    " terms");
    return Kernel::hermite_polynomial(
        enumerate_indices(n, IndexConstraint::PerDimDegree, 2 * order - 1));
}

} // namespace gpq
