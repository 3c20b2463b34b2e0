#include "gpq/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Eigenvalues>

#include "gpq/errors.hpp"

namespace gpq {

MultiIndex::MultiIndex(std::vector<int> exponents)
    : exponents_(std::move(exponents))
{
    for (int e : exponents_)
        if (e < 0)
            throw std::invalid_argument("MultiIndex entries must be non-negative");
}

MultiIndex::MultiIndex(std::initializer_list<int> exponents)
    : MultiIndex(std::vector<int>(exponents))
{
}

int MultiIndex::total_degree() const
{
    int sum = 0;
    for (int e : exponents_)
        sum += e;
    return sum;
}

int MultiIndex::max_degree() const
{
    return exponents_.empty() ? 0 : *std::max_element(exponents_.begin(), exponents_.end());
}

double MultiIndex::factorial() const
{
    double f = 1.0;
    for (int e : exponents_)
        f *= std::tgamma(e + 1.0);
    return f;
}

double hermite(const MultiIndex &index, const Eigen::VectorXd &x)
{
    if (index.size() != static_cast<std::size_t>(x.size()))
        throw DimensionError("multi-index of dimension " + std::to_string(index.size()) +
                             " is incompatible with a point of dimension " +
                             std::to_string(x.size()));
    double value = 1.0;
    for (std::size_t i = 0; i < index.size(); ++i)
        value *= hermite(index[i], x(static_cast<Eigen::Index>(i)));
    return value;
}

std::vector<MultiIndex> enumerate_indices(int n, IndexConstraint constraint, int degree)
{
    if (n < 1)
        throw std::invalid_argument("enumerate_indices: dimension must be >= 1");
    if (degree < 0)
        throw std::invalid_argument("enumerate_indices: degree must be >= 0");

    std::vector<std::vector<int>> tuples;
    std::vector<int> current(static_cast<std::size_t>(n), 0);
    std::function<void(int, int)> recurse = [&](int dim, int remaining) {
        if (dim == n) {
            tuples.push_back(current);
            return;
        }
        const int upper = constraint == IndexConstraint::TotalDegree ? remaining : degree;
        for (int e = 0; e <= upper; ++e) {
            current[static_cast<std::size_t>(dim)] = e;
            recurse(dim + 1, remaining - e);
        }
        current[static_cast<std::size_t>(dim)] = 0;
    };
    recurse(0, degree);

    auto total = [](const std::vector<int> &v) {
        int s = 0;
        for (int e : v)
            s += e;
        return s;
    };
    std::stable_sort(tuples.begin(), tuples.end(),
                     [&](const std::vector<int> &a, const std::vector<int> &b) {
                         const int ta = total(a), tb = total(b);
                         if (ta != tb)
                             return ta < tb;
                         return a > b;
                     });

    std::vector<MultiIndex> out;
    out.reserve(tuples.size());
    for (auto &t : tuples)
        out.emplace_back(std::move(t));
    return out;
}

GaussHermite1D gauss_hermite_1d(int order)
{
    if (order < 1 || order > kMaxGaussHermiteOrder)
        throw std::invalid_argument("gauss_hermite_1d: order must be in [1, " +
                                    std::to_string(kMaxGaussHermiteOrder) + "]");
    GaussHermite1D rule;
    if (order == 1) {
        rule.roots = Eigen::VectorXd::Zero(1);
        rule.weights = Eigen::VectorXd::Ones(1);
        return rule;
    }

    // Monic recurrence x p_k = p_{k+1} + k p_{k-1}: zero diagonal, sqrt(k) off-diagonal.
    const Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(order - 1);
    for (int k = 1; k < order; ++k)
        sub(k - 1) = std::sqrt(static_cast<double>(k));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw NumericalError("gauss_hermite_1d: Jacobi eigenproblem did not converge");

    rule.roots = solver.eigenvalues();
    rule.weights = solver.eigenvectors().row(0).array().square().transpose();

    // Enforce the exact symmetry of the rule about the origin.
    for (int i = 0; i < order / 2; ++i) {
        const int j = order - 1 - i;
        const double r = 0.5 * (rule.roots(j) - rule.roots(i));
        const double w = 0.5 * (rule.weights(i) + rule.weights(j));
        rule.roots(i) = -r;
        rule.roots(j) = r;
        rule.weights(i) = w;
        rule.weights(j) = w;
    }
    if (order % 2 == 1)
        rule.roots(order / 2) = 0.0;
    rule.weights /= rule.weights.sum();
    return rule;
}

} // namespace gpq
