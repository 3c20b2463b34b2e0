#include "gpq/quadrature.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "extended.hpp"
#include "gpq/errors.hpp"
#include "kernel_impl.hpp"

namespace gpq {

namespace {

using detail::Extended;
using MatrixE = detail::MatrixT<Extended>;
using VectorE = detail::VectorT<Extended>;

// Ratio of smallest to largest squared Cholesky pivot below which the Gram
// matrix is treated as singular. Binary128 resolves ~1e-34.
constexpr double kPivotRatioFloor = 1e-28;

struct Factorization {
    Eigen::LLT<MatrixE> llt;
    VectorE q;
};

Factorization factorize(const Kernel &k, const UnitPointSet &points, double jitter)
{
    points.validate();
    k.check_dimension(points.dim());
    if (!(jitter >= 0.0) || !std::isfinite(jitter))
        throw std::invalid_argument("jitter must be finite and >= 0");

    MatrixE gram = detail::gram<Extended>(k, points.points);
    gram.diagonal().array() += Extended(jitter);

    Factorization f;
    f.llt.compute(gram);
    bool ok = f.llt.info() == Eigen::Success;
    double ratio = 0.0;
    if (ok) {
        const VectorE pivots = f.llt.matrixLLT().diagonal().cwiseAbs2();
        ratio = static_cast<double>(pivots.minCoeff() / pivots.maxCoeff());
        ok = ratio > kPivotRatioFloor;
    }
    if (!ok) {
        std::ostringstream os;
        os << "Gram matrix of " << k.description() << " on " << points.size() << " "
           << to_string(points.family) << " points is numerically singular (jitter " << jitter
           << ", pivot ratio " << ratio << "); increase the jitter or use distinct points";
        throw NumericalError(os.str());
    }
    f.q = detail::embeddings<Extended>(k, points.points);
    return f;
}

double clamp_variance(Extended v)
{
    const double d = static_cast<double>(v);
    return (d < 0.0 && d >= -1e-9) ? 0.0 : d;
}

} // namespace

QuadratureRule make_rule(const ClassicalRule &classical)
{
    classical.points.validate();
    if (classical.weights.size() != classical.points.size())
        throw DimensionError("classical rule has mismatched weight and point counts");
    QuadratureRule rule;
    rule.points = classical.points;
    rule.weights = classical.weights;
    return rule;
}

QuadratureRule gpq_weights(const Kernel &k, const UnitPointSet &points, double jitter)
{
    const Factorization f = factorize(k, points, jitter);
    const VectorE w = f.llt.solve(f.q);

    QuadratureRule rule;
    rule.points = points;
    rule.jitter = jitter;
    rule.weights = w.unaryExpr([](const Extended &v) { return static_cast<double>(v); });
    rule.posterior_variance =
        clamp_variance(detail::double_integral<Extended>(k, points.dim()) - f.q.dot(w));
    if (!rule.weights.allFinite())
        throw NumericalError("GPQ weights are not finite; increase the jitter");
    return rule;
}

double gpq_variance(const Kernel &k, const UnitPointSet &points, double jitter)
{
    const Factorization f = factorize(k, points, jitter);
    const VectorE w = f.llt.solve(f.q);
    return clamp_variance(detail::double_integral<Extended>(k, points.dim()) - f.q.dot(w));
}

MatrixSqrt matrix_sqrt(const Eigen::MatrixXd &p)
{
    if (p.rows() != p.cols() || p.rows() == 0)
        throw DimensionError("matrix_sqrt: matrix must be square and non-empty");
    if (!p.allFinite())
        throw NumericalError("matrix_sqrt: matrix has non-finite entries");
    const double norm = p.cwiseAbs().maxCoeff();
    if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(norm, 1e-300))
        throw NumericalError("matrix_sqrt: matrix is not symmetric");

    MatrixSqrt out;
    Eigen::LLT<Eigen::MatrixXd> llt(p);
    if (llt.info() == Eigen::Success) {
        out.factor = llt.matrixL();
        return out;
    }
    const Eigen::MatrixXd sym = 0.5 * (p + p.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -1e-10 * norm) {
        std::ostringstream os;
        os << "matrix_sqrt: matrix is not positive semi-definite (smallest eigenvalue " << min_eig
           << ")";
        throw NumericalError(os.str());
    }
    const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    out.factor = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    out.used_eigen_fallback = true;
    return out;
}

Eigen::MatrixXd sigma_points(const UnitPointSet &points, const Eigen::VectorXd &mean,
                             const Eigen::MatrixXd &cov)
{
    if (mean.size() != points.dim() || cov.rows() != points.dim())
        throw DimensionError("sigma_points: mean/covariance dimension differs from the point set");
    const MatrixSqrt root = matrix_sqrt(cov);
    return (root.factor * points.points).colwise() + mean;
}

namespace {

Eigen::MatrixXd evaluate(const QuadratureRule &rule, const VectorFunction &g,
                         const Eigen::MatrixXd &x)
{
    Eigen::MatrixXd values;
    for (int i = 0; i < rule.size(); ++i) {
        const Eigen::VectorXd gi = g(x.col(i));
        if (i == 0)
            values.resize(gi.size(), rule.size());
        else if (gi.size() != values.rows())
            throw DimensionError("integrand returned vectors of varying length");
        if (!gi.allFinite()) {
            std::ostringstream os;
            os << "integrand is not finite at sigma-point " << i << " ("
               << x.col(i).transpose() << ")";
            throw NumericalError(os.str());
        }
        values.col(i) = gi;
    }
    return values;
}

} // namespace

Eigen::VectorXd apply_rule(const QuadratureRule &rule, const VectorFunction &g,
                           const Eigen::VectorXd &mean, const Eigen::MatrixXd &cov)
{
    const Eigen::MatrixXd x = sigma_points(rule.points, mean, cov);
    return evaluate(rule, g, x) * rule.weights;
}

TransformResult gp_transform(const QuadratureRule &rule, const VectorFunction &g,
                             const Eigen::VectorXd &mean, const Eigen::MatrixXd &cov,
                             const Eigen::MatrixXd &noise)
{
    const Eigen::MatrixXd x = sigma_points(rule.points, mean, cov);
    const Eigen::MatrixXd y = evaluate(rule, g, x);
    if (noise.rows() != y.rows() || noise.cols() != y.rows())
        throw DimensionError("gp_transform: noise covariance does not match the output dimension");

    TransformResult r;
    r.mean = y * rule.weights;
    const Eigen::MatrixXd dy = y.colwise() - r.mean;
    const Eigen::MatrixXd dx = x.colwise() - mean;
    r.cov = dy * rule.weights.asDiagonal() * dy.transpose() + noise;
    r.cov = 0.5 * (r.cov + r.cov.transpose()).eval();
    r.cross_cov = dx * rule.weights.asDiagonal() * dy.transpose();
    return r;
}

double gp_regression_mean(const Kernel &k, const Eigen::MatrixXd &inputs,
                          const Eigen::VectorXd &observations, double jitter,
                          const Eigen::VectorXd &query)
{
    if (observations.size() != inputs.cols())
        throw DimensionError("gp_regression_mean: one observation per training input required");
    if (query.size() != inputs.rows())
        throw DimensionError("gp_regression_mean: query dimension differs from the inputs");
    UnitPointSet train;
    train.points = inputs;
    const Factorization f = factorize(k, train, jitter);
    const VectorE alpha = f.llt.solve(observations.cast<Extended>());

    Extended mean(0);
    for (Eigen::Index i = 0; i < inputs.cols(); ++i)
        mean += Extended(kernel_eval(k, query, inputs.col(i))) * alpha(i);
    return static_cast<double>(mean);
}

} // namespace gpq
