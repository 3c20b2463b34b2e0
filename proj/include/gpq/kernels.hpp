#pragma once

/**
 * @file kernels.hpp
 * @brief Covariance functions on the unit-Gaussian domain and their
 *        closed-form Gaussian integrals.
 *
 * Every kernel provides the three quantities a Gaussian process quadrature
 * rule needs:
 *   - K(xi, xi')                                  kernel_eval
 *   - q(xi_i) = int K(xi, xi_i) N(xi | 0, I) dxi  kernel_mean_embedding
 *   - int int K(xi, xi') N(xi) N(xi') dxi dxi'    kernel_double_integral
 */

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "gpq/hermite.hpp"

namespace gpq {

/// s^2 exp(-|xi - xi'|^2 / (2 l^2)).
struct SquaredExponential {
    double scale = 1.0;        ///< output scale s
    double length_scale = 1.0; ///< l
};

/**
 * Sum_{I,J} lambda_{I,J} H_I(xi) H_J(xi') / (I! J!) over a finite index set.
 * lambda is symmetric PSD and indexed in the order of `indices`.
 */
struct HermitePolynomial {
    int dim = 0;
    std::vector<MultiIndex> indices;
    Eigen::MatrixXd lambda;
    bool identity_lambda = true;
};

class Kernel {
public:
    using Variant = std::variant<SquaredExponential, HermitePolynomial>;

    static Kernel squared_exponential(double scale, double length_scale);
    /// Polynomial kernel with Lambda = I.
    static Kernel hermite_polynomial(std::vector<MultiIndex> indices);
    /// Polynomial kernel with an explicit symmetric PSD coefficient matrix.
    static Kernel hermite_polynomial(std::vector<MultiIndex> indices, Eigen::MatrixXd lambda);

    const Variant &variant() const { return kernel_; }
    bool is_squared_exponential() const
    {
        return std::holds_alternative<SquaredExponential>(kernel_);
    }
    const SquaredExponential *squared_exponential_params() const
    {
        return std::get_if<SquaredExponential>(&kernel_);
    }
    const HermitePolynomial *hermite_polynomial_params() const
    {
        return std::get_if<HermitePolynomial>(&kernel_);
    }

    /// Dimension the kernel is tied to; 0 when it accepts any dimension (SE).
    int dimension() const;
    /// Throws DimensionError unless the kernel can be evaluated on R^n.
    void check_dimension(int n) const;
    std::string description() const;

private:
    explicit Kernel(Variant k) : kernel_(std::move(k)) {}
    Variant kernel_;
};

double kernel_eval(const Kernel &k, const Eigen::VectorXd &xi, const Eigen::VectorXd &xi_prime);
double kernel_mean_embedding(const Kernel &k, const Eigen::VectorXd &xi);
double kernel_double_integral(const Kernel &k, int n);

/// Gram matrix of the columns of `points` (n x N).
Eigen::MatrixXd gram_matrix(const Kernel &k, const Eigen::MatrixXd &points);
/// Mean embeddings of the columns of `points`.
Eigen::VectorXd mean_embeddings(const Kernel &k, const Eigen::MatrixXd &points);

/// Total-degree <= order Hermite kernel (UT-3 for order 3, higher-order UTs for 5, 7, 9).
Kernel make_ut_kernel(int n, int order);

/// Largest index set make_gh_kernel accepts: (2P)^n <= kMaxKernelIndices.
constexpr long kMaxKernelIndices = 20000;

/// Per-dimension degree <= 2P-1 Hermite kernel matching the order-P Gauss-Hermite grid.
Kernel make_gh_kernel(int n, int order);

} // namespace gpq
