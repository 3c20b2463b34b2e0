#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "gpq/errors.hpp"
#include "gpq/hermite.hpp"
#include "gpq/points.hpp"
#include "oracles.hpp"

using namespace gpq;

TEST(MultiIndex, BasicProperties)
{
    const MultiIndex i{2, 0, 3};
    EXPECT_EQ(i.size(), 3u);
    EXPECT_EQ(i.total_degree(), 5);
    EXPECT_EQ(i.max_degree(), 3);
    EXPECT_DOUBLE_EQ(i.factorial(), 12.0);
    EXPECT_FALSE(i.is_zero());
    EXPECT_TRUE((MultiIndex{0, 0}).is_zero());
    EXPECT_DOUBLE_EQ((MultiIndex{0, 0}).factorial(), 1.0);
    EXPECT_THROW(MultiIndex({1, -1}), std::invalid_argument);
}

TEST(HermiteUni, Examples)
{
    EXPECT_DOUBLE_EQ(hermite(0, 3.7), 1.0);
    EXPECT_DOUBLE_EQ(hermite(2, 0.0), -1.0);
    EXPECT_DOUBLE_EQ(hermite(3, 2.0), 2.0);
}

TEST(HermiteUni, MatchesRodriguesCoefficientsExactly)
{
    for (int p = 0; p <= 6; ++p) {
        const auto c = oracle::hermite_coefficients(p);
        for (int x = -2; x <= 2; ++x) {
            const long long want = oracle::eval_integer_poly(c, x);
            EXPECT_EQ(hermite(p, static_cast<double>(x)), static_cast<double>(want))
                << "p=" << p << " x=" << x;
        }
    }
}

TEST(HermiteMulti, Examples)
{
    EXPECT_DOUBLE_EQ(hermite(MultiIndex{0, 0}, Eigen::Vector2d(1.2, -0.4)), 1.0);
    EXPECT_DOUBLE_EQ(hermite(MultiIndex{2, 0}, Eigen::Vector2d(0.0, 5.0)), -1.0);
    EXPECT_DOUBLE_EQ(hermite(MultiIndex{1, 1}, Eigen::Vector2d(2.0, 3.0)), 6.0);
}

TEST(HermiteMulti, DimensionMismatchThrows)
{
    EXPECT_THROW(hermite(MultiIndex{1, 1}, Eigen::Vector3d(1, 2, 3)), DimensionError);
}

TEST(EnumerateIndices, Examples)
{
    const auto d1 = enumerate_indices(2, IndexConstraint::TotalDegree, 1);
    ASSERT_EQ(d1.size(), 3u);
    EXPECT_EQ(d1[0], (MultiIndex{0, 0}));
    EXPECT_EQ(d1[1], (MultiIndex{1, 0}));
    EXPECT_EQ(d1[2], (MultiIndex{0, 1}));

    EXPECT_EQ(enumerate_indices(2, IndexConstraint::TotalDegree, 3).size(), 10u);

    const auto p = enumerate_indices(1, IndexConstraint::PerDimDegree, 5);
    ASSERT_EQ(p.size(), 6u);
    for (int i = 0; i <= 5; ++i)
        EXPECT_EQ(p[static_cast<std::size_t>(i)], (MultiIndex{i}));
}

TEST(EnumerateIndices, CountsOrderAndUniqueness)
{
    auto binom = [](int a, int b) {
        double r = 1.0;
        for (int i = 1; i <= b; ++i)
            r = r * (a - b + i) / i;
        return static_cast<std::size_t>(std::lround(r));
    };
    for (int n = 1; n <= 4; ++n) {
        for (int deg = 0; deg <= 5; ++deg) {
            const auto t = enumerate_indices(n, IndexConstraint::TotalDegree, deg);
            EXPECT_EQ(t.size(), binom(n + deg, n));
            const auto d = enumerate_indices(n, IndexConstraint::PerDimDegree, deg);
            EXPECT_EQ(d.size(), static_cast<std::size_t>(std::lround(std::pow(deg + 1, n))));

            std::set<std::vector<int>> seen;
            for (std::size_t i = 0; i < t.size(); ++i) {
                EXPECT_TRUE(seen.insert(t[i].exponents()).second);
                EXPECT_LE(t[i].total_degree(), deg);
                if (i > 0) {
                    // graded: total degree never decreases; ties in descending lex order
                    ASSERT_LE(t[i - 1].total_degree(), t[i].total_degree());
                    if (t[i - 1].total_degree() == t[i].total_degree())
                        EXPECT_GT(t[i - 1].exponents(), t[i].exponents());
                }
            }
            for (const auto &idx : d)
                EXPECT_LE(idx.max_degree(), deg);
        }
    }
}

TEST(GaussHermite1D, Examples)
{
    const auto r1 = gauss_hermite_1d(1);
    ASSERT_EQ(r1.roots.size(), 1);
    EXPECT_NEAR(r1.roots(0), 0.0, 1e-15);
    EXPECT_NEAR(r1.weights(0), 1.0, 1e-15);

    const auto r2 = gauss_hermite_1d(2);
    EXPECT_NEAR(r2.roots(0), -1.0, 1e-14);
    EXPECT_NEAR(r2.roots(1), 1.0, 1e-14);
    EXPECT_NEAR(r2.weights(0), 0.5, 1e-14);
    EXPECT_NEAR(r2.weights(1), 0.5, 1e-14);

    const auto r3 = gauss_hermite_1d(3);
    EXPECT_NEAR(r3.roots(0), -std::sqrt(3.0), 1e-14);
    EXPECT_EQ(r3.roots(1), 0.0);
    EXPECT_NEAR(r3.roots(2), std::sqrt(3.0), 1e-14);
    EXPECT_NEAR(r3.weights(0), 1.0 / 6.0, 1e-14);
    EXPECT_NEAR(r3.weights(1), 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(r3.weights(2), 1.0 / 6.0, 1e-14);
}

TEST(GaussHermite1D, ExactForMonomials)
{
    for (int p = 1; p <= 10; ++p) {
        const auto r = gauss_hermite_1d(p);
        for (int k = 0; k <= 2 * p - 1; ++k) {
            double sum = 0.0, magnitude = 0.0;
            for (int i = 0; i < p; ++i) {
                sum += r.weights(i) * std::pow(r.roots(i), k);
                magnitude += std::abs(r.weights(i) * std::pow(r.roots(i), k));
            }
            const double want = oracle::gaussian_moment(k);
            EXPECT_NEAR(sum, want, 1e-12 * std::max(1.0, magnitude)) << "P=" << p << " k=" << k;
        }
    }
}

TEST(GaussHermite1D, MatchesNewtonOracle)
{
    for (int p : {4, 7, 12, 20}) {
        const auto r = gauss_hermite_1d(p);
        auto o = oracle::gauss_hermite(p);
        std::vector<std::size_t> order(o.x.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return o.x[a] < o.x[b]; });
        for (int i = 0; i < p; ++i) {
            EXPECT_NEAR(r.roots(i), o.x[order[static_cast<std::size_t>(i)]], 1e-11);
            EXPECT_NEAR(r.weights(i), o.w[order[static_cast<std::size_t>(i)]], 1e-12);
        }
    }
}

TEST(GaussHermite1D, StableAtMaximumOrder)
{
    const auto r = gauss_hermite_1d(kMaxGaussHermiteOrder);
    EXPECT_NEAR(r.weights.sum(), 1.0, 1e-13);
    for (int i = 0; i < kMaxGaussHermiteOrder; ++i) {
        EXPECT_EQ(r.roots(i), -r.roots(kMaxGaussHermiteOrder - 1 - i));
        EXPECT_GT(r.weights(i), 0.0);
    }
    // Roots are zeros of He_P: compare against the size of the neighbouring terms.
    for (int i = 0; i < kMaxGaussHermiteOrder; ++i) {
        const double x = r.roots(i);
        const double scale = std::abs(x * hermite(kMaxGaussHermiteOrder - 1, x)) +
                             (kMaxGaussHermiteOrder - 1) * std::abs(hermite(kMaxGaussHermiteOrder - 2, x));
        EXPECT_LT(std::abs(hermite(kMaxGaussHermiteOrder, x)), 1e-10 * scale);
    }
    EXPECT_THROW(gauss_hermite_1d(0), std::invalid_argument);
    EXPECT_THROW(gauss_hermite_1d(kMaxGaussHermiteOrder + 1), std::invalid_argument);
}

TEST(HermiteMulti, OrthogonalityUnderTensorRule)
{
    for (int n = 1; n <= 3; ++n) {
        const ClassicalRule gh = gauss_hermite_points(n, 6);
        const auto idx = enumerate_indices(n, IndexConstraint::TotalDegree, 4);
        for (const auto &a : idx) {
            for (const auto &b : idx) {
                double sum = 0.0;
                for (int i = 0; i < gh.points.size(); ++i) {
                    const Eigen::VectorXd x = gh.points.point(i);
                    sum += gh.weights(i) * hermite(a, x) * hermite(b, x);
                }
                const double want = a == b ? a.factorial() : 0.0;
                EXPECT_NEAR(sum, want, 1e-10);
            }
        }
    }
}
