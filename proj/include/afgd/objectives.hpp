#pragma once

// Objective functions with analytic gradients and smoothness metadata.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "afgd/error.hpp"
#include "afgd/smallmat.hpp"

namespace afgd {

/// Strong-convexity modulus m and gradient Lipschitz constant L, m <= L.
struct SmoothnessBounds {
  double m = 0.0;
  double L = 0.0;

  friend bool operator==(const SmoothnessBounds&, const SmoothnessBounds&) = default;
};

/// Anything the optimizers can drive: a scalar value and its gradient on R^n.
template <typename T>
concept Objective = requires(const T& f, const Vector& x) {
  { f.dimension() } -> std::convertible_to<std::size_t>;
  { f.value(x) } -> std::convertible_to<double>;
  { f.gradient(x) } -> std::same_as<Vector>;
};

namespace detail {

inline void require_dimension(std::size_t expected, const Vector& x, const char* who) {
  if (x.size() != expected) {
    throw InvalidInput(std::string(who) + ": expected dimension " +
                       std::to_string(expected) + ", got " + std::to_string(x.size()));
  }
}

}  // namespace detail

/// f(x) = x^T Q x + b^T x + c. Hessian is 2Q.
class QuadraticObjective {
 public:
  QuadraticObjective(SymMatrix q, Vector b, double c)
      : q_(std::move(q)), b_(std::move(b)), c_(c) {
    if (b_.size() != q_.dim())
      throw InvalidInput("QuadraticObjective: b has wrong dimension");
    if (!b_.all_finite() || !std::isfinite(c_))
      throw InvalidInput("QuadraticObjective: non-finite coefficient");
  }

  std::size_t dimension() const noexcept { return q_.dim(); }
  const SymMatrix& q() const noexcept { return q_; }
  const Vector& b() const noexcept { return b_; }
  double c() const noexcept { return c_; }

  double value(const Vector& x) const {
    detail::require_dimension(dimension(), x, "QuadraticObjective::value");
    return dot(x, q_.to_matrix() * x) + dot(b_, x) + c_;
  }

  Vector gradient(const Vector& x) const {
    detail::require_dimension(dimension(), x, "QuadraticObjective::gradient");
    return 2.0 * (q_.to_matrix() * x) + b_;
  }

  SymMatrix hessian() const { return 2.0 * q_; }

  /// Replace the Hessian-derived (m, L) with externally stated values.
  QuadraticObjective with_bounds_override(SmoothnessBounds b) const {
    QuadraticObjective copy = *this;
    copy.bounds_override_ = b;
    return copy;
  }
  const std::optional<SmoothnessBounds>& bounds_override() const noexcept {
    return bounds_override_;
  }

 private:
  SymMatrix q_;
  Vector b_;
  double c_;
  std::optional<SmoothnessBounds> bounds_override_;
};

struct Sample {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// J(theta) = 1/(2N) sum_i (theta0 + theta1 x_i - y_i)^2 over N samples.
class RegressionObjective {
 public:
  explicit RegressionObjective(std::vector<Sample> samples) : samples_(std::move(samples)) {
    if (samples_.size() < 2)
      throw InvalidInput("RegressionObjective: need at least 2 samples");
    for (const auto& s : samples_)
      if (!std::isfinite(s.x) || !std::isfinite(s.y))
        throw InvalidInput("RegressionObjective: non-finite sample");
  }

  std::size_t dimension() const noexcept { return 2; }
  std::size_t count() const noexcept { return samples_.size(); }
  const std::vector<Sample>& samples() const noexcept { return samples_; }

  double value(const Vector& theta) const {
    detail::require_dimension(2, theta, "RegressionObjective::value");
    double s = 0.0;
    for (const auto& p : samples_) {
      const double r = theta[0] + theta[1] * p.x - p.y;
      s += r * r;
    }
    return s / (2.0 * static_cast<double>(count()));
  }

  Vector gradient(const Vector& theta) const {
    detail::require_dimension(2, theta, "RegressionObjective::gradient");
    double g0 = 0.0, g1 = 0.0;
    for (const auto& p : samples_) {
      const double r = theta[0] + theta[1] * p.x - p.y;
      g0 += r;
      g1 += r * p.x;
    }
    const double n = static_cast<double>(count());
    return Vector{g0 / n, g1 / n};
  }

  /// Constant Hessian (1/N) [[N, sum x], [sum x, sum x^2]].
  SymMatrix hessian() const {
    double sx = 0.0, sxx = 0.0;
    for (const auto& p : samples_) {
      sx += p.x;
      sxx += p.x * p.x;
    }
    const double n = static_cast<double>(count());
    return SymMatrix{{1.0, sx / n}, {sx / n, sxx / n}};
  }

  /// Closed-form least-squares fit from the 2x2 normal equations.
  Vector normal_equation_solution() const {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& p : samples_) {
      sx += p.x;
      sy += p.y;
      sxx += p.x * p.x;
      sxy += p.x * p.y;
    }
    const double n = static_cast<double>(count());
    const double det = n * sxx - sx * sx;
    if (!(std::abs(det) > 1e-12 * std::max(1.0, n * sxx)))
      throw DegenerateObjective("regression: fewer than 2 distinct x values");
    const double slope = (n * sxy - sx * sy) / det;
    const double intercept = (sy - slope * sx) / n;
    return Vector{intercept, slope};
  }

 private:
  std::vector<Sample> samples_;
};

/// Solves 2Q x = -b by Gaussian elimination with partial pivoting.
inline Vector minimizer(const QuadraticObjective& f) {
  const std::size_t n = f.dimension();
  Matrix a = f.hessian().to_matrix();
  Vector rhs = -1.0 * f.b();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
  if (scale == 0.0) throw DegenerateObjective("minimizer: zero Hessian");

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) <= 1e-13 * scale)
      throw DegenerateObjective("minimizer: singular Hessian");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      std::swap(rhs[col], rhs[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a(r, col) / a(col, col);
      for (std::size_t j = col; j < n; ++j) a(r, j) -= factor * a(col, j);
      rhs[r] -= factor * rhs[col];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

/// (m, L) from the Hessian spectrum unless an override was injected.
inline SmoothnessBounds bounds(const QuadraticObjective& f) {
  if (f.bounds_override()) return *f.bounds_override();
  const auto eig = sym_eigenvalues(f.hessian());
  return {eig.front(), eig.back()};
}

inline SmoothnessBounds bounds(const RegressionObjective& f) {
  const auto eig = sym_eigenvalues(f.hessian());
  return {std::max(0.0, eig.front()), eig.back()};
}

/// Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps).
template <Objective F>
Vector finite_diff_gradient(const F& f, const Vector& x, double eps = 1e-5) {
  if (!(eps > 0.0)) throw InvalidInput("finite_diff_gradient: eps must be > 0");
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += eps;
    xm[i] -= eps;
    g[i] = (f.value(xp) - f.value(xm)) / (2.0 * eps);
  }
  return g;
}

/// Slack of the co-coercivity inequality
///   mL/(m+L) |y-x|^2 + 1/(m+L) |gy-gx|^2 <= (gy-gx)^T (y-x),
/// returned as right side minus left side (>= 0 when it holds).
inline double cocoercivity_slack(SmoothnessBounds b, const Vector& x, const Vector& y,
                                 const Vector& gx, const Vector& gy) {
  const Vector dx = y - x;
  const Vector dg = gy - gx;
  const double s = b.m + b.L;
  const double lhs = b.m * b.L / s * dot(dx, dx) + dot(dg, dg) / s;
  return dot(dg, dx) - lhs;
}

template <Objective F>
bool cocoercivity_holds(const F& f, SmoothnessBounds b, const Vector& x, const Vector& y,
                        double tol) {
  return cocoercivity_slack(b, x, y, f.gradient(x), f.gradient(y)) >= -tol;
}

template <typename F>
  requires requires(const F& f) { bounds(f); }
bool cocoercivity_holds(const F& f, const Vector& x, const Vector& y, double tol) {
  return cocoercivity_holds(f, bounds(f), x, y, tol);
}

/// Quadratic-constraint form [x-y; gx-gy]^T Q_f [x-y; gx-gy] with
/// Q_f = [[-mL/(m+L) I, I/2], [I/2, -1/(m+L) I]].
inline double quadratic_constraint_value(SmoothnessBounds b, const Vector& x,
                                         const Vector& y, const Vector& gx,
                                         const Vector& gy) {
  const std::size_t n = x.size();
  const double s = b.m + b.L;
  const Matrix qf_block{{-b.m * b.L / s, 0.5}, {0.5, -1.0 / s}};
  const Matrix qf = kron(qf_block, Matrix::identity(n));
  Vector z(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = x[i] - y[i];
    z[n + i] = gx[i] - gy[i];
  }
  return dot(z, qf * z);
}

/// Reads a two-column CSV with header `x,y`.
inline RegressionObjective load_regression_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<Sample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "x,y") throw ParseError(path, line_no, "", "expected header 'x,y'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw ParseError(path, line_no, "", "expected two comma-separated columns");
    Sample s;
    try {
      std::size_t used = 0;
      const std::string xs = line.substr(0, comma), ys = line.substr(comma + 1);
      s.x = std::stod(xs, &used);
      if (used != xs.size()) throw std::invalid_argument("x");
      s.y = std::stod(ys, &used);
      if (used != ys.size()) throw std::invalid_argument("y");
    } catch (const std::exception&) {
      throw ParseError(path, line_no, "", "malformed number in '" + line + "'");
    }
    samples.push_back(s);
  }
  if (!header_seen) throw ParseError(path, 0, "", "empty dataset");
  return RegressionObjective(std::move(samples));
}

}  // namespace afgd
