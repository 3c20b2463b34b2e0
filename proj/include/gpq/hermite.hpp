#pragma once

/**
 * @file hermite.hpp
 * @brief Probabilists' Hermite polynomials, multi-indices and Gauss-Hermite rules.
 *
 * All polynomials here follow the probabilists' convention
 *
 *   He_p(x) = (-1)^p exp(x^2/2) d^p/dx^p exp(-x^2/2),
 *   He_{p+1}(x) = x He_p(x) - p He_{p-1}(x),
 *
 * which is orthogonal under the standard normal density N(0,1):
 * <He_p, He_q> = p! delta_pq.  The physicists' polynomials H_p used by
 * most numerical libraries are orthogonal under exp(-x^2) instead and are
 * related by H_p(x) = 2^{p/2} He_p(sqrt(2) x).  Do not mix the two.
 */

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace gpq {

/// Tuple of non-negative per-dimension polynomial degrees.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> exponents);
    MultiIndex(std::initializer_list<int> exponents);

    std::size_t size() const { return exponents_.size(); }
    int operator[](std::size_t i) const { return exponents_[i]; }
    const std::vector<int> &exponents() const { return exponents_; }

    /// Sum of the entries, |I|.
    int total_degree() const;
    /// Largest entry, max I (0 for the empty index).
    int max_degree() const;
    /// Product of per-entry factorials, I!.
    double factorial() const;
    bool is_zero() const { return total_degree() == 0; }

    bool operator==(const MultiIndex &) const = default;

private:
    std::vector<int> exponents_;
};

/// He_p(x) by the three-term recurrence. Templated so extended precision
/// scalars can reuse it.
template <typename T>
T hermite(int p, T x)
{
    if (p <= 0)
        return T(1);
    T prev(1);
    T cur = x;
    for (int k = 1; k < p; ++k) {
        T next = x * cur - T(k) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

inline double hermite(int p, double x) { return hermite<double>(p, x); }

/// H_I(x) = He_{i1}(x1) * ... * He_{in}(xn). Throws DimensionError on size mismatch.
double hermite(const MultiIndex &index, const Eigen::VectorXd &x);

enum class IndexConstraint {
    TotalDegree,  ///< |I| <= degree
    PerDimDegree, ///< max I <= degree
};

/**
 * All multi-indices of dimension n satisfying the constraint, in graded
 * order: ascending total degree, ties broken by descending lexicographic
 * order so that (1,0) precedes (0,1). The zero index is always first.
 */
std::vector<MultiIndex> enumerate_indices(int n, IndexConstraint constraint, int degree);

/// One-dimensional Gauss-Hermite rule for N(0,1).
struct GaussHermite1D {
    Eigen::VectorXd roots;   ///< ascending zeros of He_P
    Eigen::VectorXd weights; ///< sum to one
};

constexpr int kMaxGaussHermiteOrder = 50;

/// Golub-Welsch: eigen-decomposition of the symmetric Jacobi matrix of He_p.
/// Supported orders are 1..kMaxGaussHermiteOrder.
GaussHermite1D gauss_hermite_1d(int order);

} // namespace gpq
