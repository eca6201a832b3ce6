#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>

namespace emoesg {

/// Neumaier-compensated accumulator. Reductions over per-headline and
/// per-row values go through this so results do not depend on grouping.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

/// Arithmetic mean; NaN for an empty span.
double mean(std::span<const double> xs);

/// 17 significant digits, the fixed text form for reals in CSV/JSON outputs.
std::string format_real(double x);

/// Shortest text that parses back to the same double.
std::string format_shortest(double x);

/// Strict full-string parse; returns false on any trailing garbage.
bool parse_real(std::string_view text, double& out);

}  // namespace emoesg
