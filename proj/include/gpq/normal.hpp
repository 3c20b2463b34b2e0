#pragma once

namespace gpq {

/// Standard normal CDF, Phi(x).
double normal_cdf(double x);

/**
 * Inverse standard normal CDF, Phi^{-1}(u) for u in (0, 1).
 *
 * Acklam's rational approximation (relative error below 1.15e-9) followed by
 * one Halley correction step against erfc, which brings the absolute error
 * to the level of double rounding over the whole open interval. Returns
 * -inf / +inf at u = 0 / 1 and throws std::domain_error outside [0, 1].
 */
double normal_quantile(double u);

} // namespace gpq
