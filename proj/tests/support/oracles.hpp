#pragma once

// Reference computations that share no code with the library.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Mat4 = std::array<std::array<double, 4>, 4>;

/// Gauss-Jordan inverse with partial pivoting.
inline Mat4 invert4(Mat4 a) {
  Mat4 inv{};
  for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0.0) throw std::runtime_error("singular");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (int j = 0; j < 4; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (int j = 0; j < 4; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

struct NormalEquations {
  std::array<double, 4> beta{};
  Mat4 xtx_inv{};
};

/// (X'X)^-1 X'y.
inline NormalEquations normal_equations(const std::vector<double>& y, const std::vector<std::array<double, 4>>& X) {
  Mat4 xtx{};
  std::array<double, 4> xty{};
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (int a = 0; a < 4; ++a) {
      xty[a] += X[i][a] * y[i];
      for (int b = 0; b < 4; ++b) xtx[a][b] += X[i][a] * X[i][b];
    }
  }
  NormalEquations out;
  out.xtx_inv = invert4(xtx);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) out.beta[a] += out.xtx_inv[a][b] * xty[b];
  }
  return out;
}

inline double t_density(double x, double df) {
  const double logc = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) - 0.5 * std::log(df * M_PI);
  return std::exp(logc - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * eps) return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b, double eps = 1e-13) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson(f, a, b, fa, fm, fb, whole, eps, 50);
}

/// 1 - 2 * integral of the t density over [0, |t|].
inline double t_two_sided_p(double t, double df) {
  const double area = integrate([df](double x) { return t_density(x, df); }, 0.0, std::fabs(t));
  return 1.0 - 2.0 * area;
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace oracle
