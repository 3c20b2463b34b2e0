#pragma once

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>
#include <Eigen/Cholesky>

namespace gpq::detail {

using Extended = boost::multiprecision::float128;

} // namespace gpq::detail
