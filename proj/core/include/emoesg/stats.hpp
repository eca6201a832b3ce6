#pragma once

namespace emoesg::stats {

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom. Returns 0 for
/// infinite t and 1 for t = 0.
double student_t_two_sided_p(double t, double df);

/// Inverse CDF of Student's t.
double student_t_quantile(double probability, double df);

/// P(|Z| >= |z|) for a standard normal.
double normal_two_sided_p(double z);

}  // namespace emoesg::stats
