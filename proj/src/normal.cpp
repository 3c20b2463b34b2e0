#include "gpq/normal.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gpq {

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double u)
{
    if (!(u >= 0.0 && u <= 1.0))
        throw std::domain_error("normal_quantile: argument outside [0, 1]");
    if (u == 0.0)
        return -std::numeric_limits<double>::infinity();
    if (u == 1.0)
        return std::numeric_limits<double>::infinity();
    // Work in the lower half, where Phi(x) - u keeps full relative precision.
    if (u > 0.5)
        return -normal_quantile(1.0 - u);

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;

    double x;
    if (u < low) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = u - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }

    // Halley step on Phi(x) - u.
    const double e = normal_cdf(x) - u;
    const double density_inv = std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    const double step = e * density_inv;
    x -= step / (1.0 + 0.5 * x * step);
    return x;
}

} // namespace gpq
