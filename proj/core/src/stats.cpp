#include "emoesg/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace emoesg::stats {

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("student_t_two_sided_p: df must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  const double a = std::fabs(t);
  if (std::isinf(a)) return 0.0;
  const boost::math::students_t dist(df);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, a));
  return p > 1.0 ? 1.0 : p;
}

double student_t_quantile(double probability, double df) {
  const boost::math::students_t dist(df);
  return boost::math::quantile(dist, probability);
}

double normal_two_sided_p(double z) {
  if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

}  // namespace emoesg::stats
