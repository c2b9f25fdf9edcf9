#pragma once

// First-order step rules (GD, Heavy-ball, Nesterov, fractional-order GD and
// its adaptive variants) and the iteration driver that records trajectories.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "afgd/error.hpp"
#include "afgd/objectives.hpp"
#include "afgd/smallmat.hpp"

namespace afgd {

enum class Method { GD, HeavyBall, Nesterov, FOGD, AFOGD, AFOAGD };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::GD: return "GD";
    case Method::HeavyBall: return "HeavyBall";
    case Method::Nesterov: return "Nesterov";
    case Method::FOGD: return "FOGD";
    case Method::AFOGD: return "AFOGD";
    case Method::AFOAGD: return "AFOAGD";
  }
  return "?";
}

/// Case-insensitive; accepts the canonical names plus `hb`, `heavy-ball`, `nes`.
inline Method parse_method(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "gd") return Method::GD;
  if (s == "heavyball" || s == "heavy-ball" || s == "heavy_ball" || s == "hb")
    return Method::HeavyBall;
  if (s == "nesterov" || s == "nes") return Method::Nesterov;
  if (s == "fogd") return Method::FOGD;
  if (s == "afogd") return Method::AFOGD;
  if (s == "afoagd") return Method::AFOAGD;
  throw InvalidConfig("unknown method '" + std::string(name) + "'");
}

struct OptimizerConfig {
  Method method = Method::GD;
  double alpha = 0.1;   // step scale
  double eta = 0.0;     // extrapolation y_k = x_k + eta (x_k - x_{k-1})
  double gamma = 0.0;   // heavy-ball momentum
  double mu = 1.0;      // fractional order, 0 < mu < 2
  double delta = 1e-4;  // keeps (|dx| + delta)^(1-mu) finite
  double c1 = 1.0;      // clamp bounds on the fractional multiplier
  double c2 = 1.0;
  double epsilon = 1e-8;  // gradient-norm stopping threshold
  int k_max = 1000;

  void validate() const {
    auto bad = [](const std::string& what) { throw InvalidConfig(what); };
    if (!(alpha > 0.0) || !std::isfinite(alpha)) bad("alpha must be > 0");
    if (!(eta >= 0.0) || !std::isfinite(eta)) bad("eta must be >= 0");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) bad("gamma must be >= 0");
    if (!(mu > 0.0 && mu < 2.0)) bad("mu must lie in (0, 2)");
    if (!(delta > 0.0) || !std::isfinite(delta)) bad("delta must be > 0");
    if (!(c1 > 0.0) || !(c2 >= c1) || !std::isfinite(c2)) bad("need 0 < c1 <= c2 < inf");
    if (!(epsilon > 0.0)) bad("epsilon must be > 0");
    if (k_max < 1) bad("k_max must be >= 1");
  }

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

/// Two-iterate memory (plus y_{k-1} for the accelerated method).
struct OptimizerState {
  Vector x_prev;
  Vector x_cur;
  std::optional<Vector> y_prev;
  int k = 0;
};

enum class StopReason { GradientTolerance, MaxIterations, NonFinite };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::GradientTolerance: return "GradientTolerance";
    case StopReason::MaxIterations: return "MaxIterations";
    case StopReason::NonFinite: return "NonFinite";
  }
  return "?";
}

/// Recorded run. Index 0 and 1 hold the two seeds; multipliers[i] is the
/// scalar that multiplied alpha * grad to produce iterate i (0 for seeds).
struct Trajectory {
  std::vector<Vector> iterates;
  std::vector<double> values;
  std::vector<double> grad_norms;
  std::vector<double> multipliers;
  StopReason stop_reason = StopReason::MaxIterations;

  std::size_t size() const noexcept { return iterates.size(); }
  /// Number of steps taken (iterates beyond the two seeds).
  std::size_t steps() const noexcept { return iterates.size() < 2 ? 0 : iterates.size() - 2; }
};

/// (|dx| + delta)^(1 - mu).
inline double fractional_multiplier(double step_norm, double delta, double mu) {
  return std::pow(step_norm + delta, 1.0 - mu);
}

struct AdaptiveMultiplier {
  double effective = 1.0;  // beta * raw, lies in [c1, c2]
  double beta = 1.0;
};

/// Projects the raw fractional multiplier onto [c1, c2]; beta is the factor
/// that achieves it. In-range values pass through with beta = 1.
inline AdaptiveMultiplier adaptive_multiplier(double raw, double c1, double c2) {
  const double eff = std::clamp(raw, c1, c2);
  return {eff, eff == raw ? 1.0 : eff / raw};
}

namespace detail {

/// x - scale * g, the shared form of every gradient step.
inline Vector descend(const Vector& x, double scale, const Vector& g) {
  Vector r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - scale * g[i];
  return r;
}

/// x + w (x - x_prev).
inline Vector extrapolate(const Vector& x, const Vector& x_prev, double w) {
  Vector r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + w * (x[i] - x_prev[i]);
  return r;
}

}  // namespace detail

struct FractionalStep {
  Vector x_next;
  double multiplier = 1.0;
};

struct AcceleratedStep {
  Vector x_next;
  Vector y;
  double multiplier = 1.0;
};

template <Objective F>
Vector step_gd(const F& f, const OptimizerState& s, const OptimizerConfig& cfg) {
  return detail::descend(s.x_cur, cfg.alpha, f.gradient(s.x_cur));
}

template <Objective F>
Vector step_heavy_ball(const F& f, const OptimizerState& s, const OptimizerConfig& cfg) {
  const Vector moved = detail::extrapolate(s.x_cur, s.x_prev, cfg.gamma);
  return detail::descend(moved, cfg.alpha, f.gradient(s.x_cur));
}

template <Objective F>
Vector step_nesterov(const F& f, const OptimizerState& s, const OptimizerConfig& cfg) {
  const Vector y = detail::extrapolate(s.x_cur, s.x_prev, cfg.eta);
  return detail::descend(y, cfg.alpha, f.gradient(y));
}

/// Unclamped fractional step; may diverge for 1 < mu < 2.
template <Objective F>
FractionalStep step_fogd(const F& f, const OptimizerState& s, const OptimizerConfig& cfg) {
  const double raw = fractional_multiplier(norm(s.x_cur - s.x_prev), cfg.delta, cfg.mu);
  return {detail::descend(s.x_cur, cfg.alpha * raw, f.gradient(s.x_cur)), raw};
}

template <Objective F>
FractionalStep step_afogd(const F& f, const OptimizerState& s, const OptimizerConfig& cfg) {
  const double raw = fractional_multiplier(norm(s.x_cur - s.x_prev), cfg.delta, cfg.mu);
  const double eff = adaptive_multiplier(raw, cfg.c1, cfg.c2).effective;
  return {detail::descend(s.x_cur, cfg.alpha * eff, f.gradient(s.x_cur)), eff};
}

template <Objective F>
AcceleratedStep step_afoagd(const F& f, const OptimizerState& s, const OptimizerConfig& cfg) {
  if (!s.y_prev) throw InvalidConfig("AFOAGD step requires y_prev");
  Vector y = detail::extrapolate(s.x_cur, s.x_prev, cfg.eta);
  const double raw = fractional_multiplier(norm(y - *s.y_prev), cfg.delta, cfg.mu);
  const double eff = adaptive_multiplier(raw, cfg.c1, cfg.c2).effective;
  Vector next = detail::descend(y, cfg.alpha * eff, f.gradient(y));
  return {std::move(next), std::move(y), eff};
}

/// Iterates until the gradient norm falls below epsilon, k_max steps have
/// been taken, or an iterate becomes non-finite.
///
/// The stopping test measures |grad f(y_k)| for AFOAGD and |grad f(x_k)| for
/// every other method. y0 is required for AFOAGD and ignored otherwise.
template <Objective F>
Trajectory run(const F& f, const OptimizerConfig& cfg, const Vector& x0, const Vector& x1,
               const std::optional<Vector>& y0 = std::nullopt) {
  cfg.validate();
  const std::size_t n = f.dimension();
  if (x0.size() != n || x1.size() != n)
    throw InvalidInput("run: seed dimension does not match objective");
  if (!x0.all_finite() || !x1.all_finite()) throw InvalidInput("run: non-finite seed");
  if (cfg.method == Method::AFOAGD) {
    if (!y0) throw InvalidConfig("run: AFOAGD requires y0");
    if (y0->size() != n || !y0->all_finite()) throw InvalidInput("run: bad y0");
  }

  Trajectory t;
  auto record = [&](const Vector& x, double multiplier) {
    t.iterates.push_back(x);
    t.values.push_back(f.value(x));
    t.grad_norms.push_back(norm(f.gradient(x)));
    t.multipliers.push_back(multiplier);
  };
  record(x0, 0.0);
  record(x1, 0.0);

  OptimizerState s{x0, x1, y0, 0};
  while (true) {
    const bool accelerated = cfg.method == Method::AFOAGD;
    const double test_norm =
        accelerated ? norm(f.gradient(detail::extrapolate(s.x_cur, s.x_prev, cfg.eta)))
                    : t.grad_norms.back();
    if (test_norm < cfg.epsilon) {
      t.stop_reason = StopReason::GradientTolerance;
      break;
    }
    if (s.k >= cfg.k_max) {
      t.stop_reason = StopReason::MaxIterations;
      break;
    }

    Vector next;
    double multiplier = 1.0;
    std::optional<Vector> y_used;
    switch (cfg.method) {
      case Method::GD: next = step_gd(f, s, cfg); break;
      case Method::HeavyBall: next = step_heavy_ball(f, s, cfg); break;
      case Method::Nesterov: next = step_nesterov(f, s, cfg); break;
      case Method::FOGD: {
        auto r = step_fogd(f, s, cfg);
        next = std::move(r.x_next);
        multiplier = r.multiplier;
        break;
      }
      case Method::AFOGD: {
        auto r = step_afogd(f, s, cfg);
        next = std::move(r.x_next);
        multiplier = r.multiplier;
        break;
      }
      case Method::AFOAGD: {
        auto r = step_afoagd(f, s, cfg);
        next = std::move(r.x_next);
        multiplier = r.multiplier;
        y_used = std::move(r.y);
        break;
      }
    }

    ++s.k;
    if (!next.all_finite()) {
      t.iterates.push_back(next);
      t.values.push_back(std::nan(""));
      t.grad_norms.push_back(std::nan(""));
      t.multipliers.push_back(multiplier);
      t.stop_reason = StopReason::NonFinite;
      break;
    }
    record(next, multiplier);
    if (!std::isfinite(t.values.back()) || !std::isfinite(t.grad_norms.back())) {
      t.stop_reason = StopReason::NonFinite;
      break;
    }
    s.x_prev = std::move(s.x_cur);
    s.x_cur = std::move(next);
    if (y_used) s.y_prev = std::move(y_used);
  }
  return t;
}

}  // namespace afgd
