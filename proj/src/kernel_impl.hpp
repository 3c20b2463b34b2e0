#pragma once

// Scalar-generic kernel evaluation shared by the double-precision public API
// and the extended-precision weight solver.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "gpq/kernels.hpp"

namespace gpq::detail {

template <typename T>
using MatrixT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VectorT = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Rows: points; columns: H_I(xi) / I! in index-set order.
template <typename T>
MatrixT<T> hermite_features(const HermitePolynomial &k, const Eigen::MatrixXd &points)
{
    const Eigen::Index n = points.rows();
    const Eigen::Index count = points.cols();
    int max_deg = 0;
    for (const auto &idx : k.indices)
        max_deg = std::max(max_deg, idx.max_degree());

    std::vector<T> inv_factorial(static_cast<std::size_t>(max_deg) + 1);
    inv_factorial[0] = T(1);
    for (int p = 1; p <= max_deg; ++p)
        inv_factorial[static_cast<std::size_t>(p)] =
            inv_factorial[static_cast<std::size_t>(p) - 1] / T(p);

    MatrixT<T> features(count, static_cast<Eigen::Index>(k.indices.size()));
    // table(d, p) = He_p(x_d) / p!
    MatrixT<T> table(n, max_deg + 1);
    for (Eigen::Index i = 0; i < count; ++i) {
        for (Eigen::Index d = 0; d < n; ++d) {
            const T x = T(points(d, i));
            T prev(1), cur = x;
            table(d, 0) = T(1);
            if (max_deg >= 1)
                table(d, 1) = x;
            for (int p = 1; p < max_deg; ++p) {
                T next = x * cur - T(p) * prev;
                prev = cur;
                cur = next;
                table(d, p + 1) = cur;
            }
            for (int p = 0; p <= max_deg; ++p)
                table(d, p) *= inv_factorial[static_cast<std::size_t>(p)];
        }
        for (std::size_t j = 0; j < k.indices.size(); ++j) {
            T v(1);
            for (Eigen::Index d = 0; d < n; ++d)
                v *= table(d, k.indices[j][static_cast<std::size_t>(d)]);
            features(i, static_cast<Eigen::Index>(j)) = v;
        }
    }
    return features;
}

template <typename T>
T squared_distance(const Eigen::MatrixXd &a, Eigen::Index i, const Eigen::MatrixXd &b, Eigen::Index j)
{
    T d2(0);
    for (Eigen::Index d = 0; d < a.rows(); ++d) {
        const T diff = T(a(d, i)) - T(b(d, j));
        d2 += diff * diff;
    }
    return d2;
}

template <typename T>
MatrixT<T> gram(const Kernel &k, const Eigen::MatrixXd &points)
{
    using std::exp;
    const Eigen::Index count = points.cols();
    if (const auto *se = k.squared_exponential_params()) {
        const T s2 = T(se->scale) * T(se->scale);
        const T two_l2 = T(2) * T(se->length_scale) * T(se->length_scale);
        MatrixT<T> g(count, count);
        for (Eigen::Index i = 0; i < count; ++i) {
            g(i, i) = s2;
            for (Eigen::Index j = 0; j < i; ++j) {
                const T v = s2 * exp(-squared_distance<T>(points, i, points, j) / two_l2);
                g(i, j) = v;
                g(j, i) = v;
            }
        }
        return g;
    }
    const auto &hp = *k.hermite_polynomial_params();
    const MatrixT<T> phi = hermite_features<T>(hp, points);
    MatrixT<T> g;
    if (hp.identity_lambda)
        g = phi * phi.transpose();
    else
        g = phi * hp.lambda.template cast<T>() * phi.transpose();
    return (g + g.transpose()) / T(2);
}

template <typename T>
VectorT<T> embeddings(const Kernel &k, const Eigen::MatrixXd &points)
{
    using std::exp;
    using std::pow;
    const Eigen::Index count = points.cols();
    VectorT<T> q(count);
    if (const auto *se = k.squared_exponential_params()) {
        const T l2 = T(se->length_scale) * T(se->length_scale);
        const T s2 = T(se->scale) * T(se->scale);
        const T factor = s2 * pow(l2 / (T(1) + l2), T(points.rows()) / T(2));
        for (Eigen::Index i = 0; i < count; ++i) {
            T r2(0);
            for (Eigen::Index d = 0; d < points.rows(); ++d)
                r2 += T(points(d, i)) * T(points(d, i));
            q(i) = factor * exp(-r2 / (T(2) * (T(1) + l2)));
        }
        return q;
    }
    // Only H_0 == 1 integrates to a non-zero value, so the lambda row of the
    // zero multi-index is all that survives.
    const auto &hp = *k.hermite_polynomial_params();
    const MatrixT<T> phi = hermite_features<T>(hp, points);
    q.setZero();
    for (std::size_t z = 0; z < hp.indices.size(); ++z) {
        if (!hp.indices[z].is_zero())
            continue;
        if (hp.identity_lambda)
            q = phi.col(static_cast<Eigen::Index>(z));
        else
            q = phi * hp.lambda.row(static_cast<Eigen::Index>(z)).transpose().template cast<T>();
    }
    return q;
}

template <typename T>
T double_integral(const Kernel &k, int n)
{
    using std::pow;
    if (const auto *se = k.squared_exponential_params()) {
        const T l2 = T(se->length_scale) * T(se->length_scale);
        return T(se->scale) * T(se->scale) * pow(l2 / (l2 + T(2)), T(n) / T(2));
    }
    const auto &hp = *k.hermite_polynomial_params();
    for (std::size_t z = 0; z < hp.indices.size(); ++z)
        if (hp.indices[z].is_zero())
            return T(hp.lambda(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(z)));
    return T(0);
}

} // namespace gpq::detail
