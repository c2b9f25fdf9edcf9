#pragma once

// Scenario runner, the three benchmark simulations, rate fitting, a seeded
// regression-data generator, CSV/JSON export and parameter sweeps.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "afgd/certificates.hpp"
#include "afgd/error.hpp"
#include "afgd/objectives.hpp"
#include "afgd/optimizers.hpp"
#include "afgd/smallmat.hpp"

namespace afgd {

// ---------------------------------------------------------------------------
// Rate estimation

struct RateEstimate {
  double rho_emp = 0.0;
  double c_emp = 0.0;
  std::size_t fit_first = 0;  // inclusive index range of the fit window
  std::size_t fit_last = 0;
  double residual = 0.0;      // RMS of the log-error residuals
};

inline constexpr std::size_t kRateSkip = 3;
inline constexpr std::size_t kRateMinPoints = 5;

/// Least-squares fit of log e_k = log c + k log rho.
///
/// The window starts after the first three errors and runs until the first
/// error at or below max(1e-12, 100 eps * reference) or the first non-finite one.
inline RateEstimate empirical_rate(std::span<const double> errors, double reference) {
  const double floor =
      std::max(1e-12, 100.0 * std::numeric_limits<double>::epsilon() * std::abs(reference));
  std::size_t last = kRateSkip;
  while (last < errors.size() && std::isfinite(errors[last]) && errors[last] > floor) ++last;
  if (last < kRateSkip + kRateMinPoints)
    throw DegenerateFit("empirical_rate: fewer than 5 usable iterates above the error floor");

  const auto n = static_cast<double>(last - kRateSkip);
  double sk = 0.0, sy = 0.0, skk = 0.0, sky = 0.0;
  for (std::size_t k = kRateSkip; k < last; ++k) {
    const double kk = static_cast<double>(k);
    const double y = std::log(errors[k]);
    sk += kk;
    sy += y;
    skk += kk * kk;
    sky += kk * y;
  }
  const double slope = (n * sky - sk * sy) / (n * skk - sk * sk);
  const double intercept = (sy - slope * sk) / n;

  double ss = 0.0;
  for (std::size_t k = kRateSkip; k < last; ++k) {
    const double r = std::log(errors[k]) - (intercept + slope * static_cast<double>(k));
    ss += r * r;
  }
  return {std::exp(slope), std::exp(intercept), kRateSkip, last - 1, std::sqrt(ss / n)};
}

inline std::vector<double> distances(const Trajectory& t, const Vector& x_star) {
  std::vector<double> e;
  e.reserve(t.size());
  for (const auto& x : t.iterates) e.push_back(norm(x - x_star));
  return e;
}

inline RateEstimate empirical_rate(const Trajectory& t, const Vector& x_star) {
  const auto e = distances(t, x_star);
  return empirical_rate(e, e.empty() ? 0.0 : e.front());
}

// ---------------------------------------------------------------------------
// Synthetic regression data

/// 64-bit LCG (Knuth's MMIX constants, modulus 2^64).
using Lcg64 = std::linear_congruential_engine<std::uint64_t, 6364136223846793005ULL,
                                              1442695040888963407ULL, 0ULL>;

/// Standard normal by Box-Muller (cosine branch only) over two LCG draws.
/// u1 lies in (0, 1] so log(u1) is finite.
inline double box_muller(Lcg64& g) {
  constexpr double kScale = 0x1.0p-53;
  const double u1 = static_cast<double>((g() >> 11) + 1) * kScale;
  const double u2 = static_cast<double>(g() >> 11) * kScale;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// x_i equally spaced on [0, 4]; y_i = theta0 + theta1 x_i + noise_scale z_i.
inline RegressionObjective generate_regression_dataset(std::uint64_t seed, int count,
                                                       std::pair<double, double> theta_true,
                                                       double noise_scale) {
  if (count < 2) throw InvalidInput("generate_regression_dataset: count must be >= 2");
  if (!(noise_scale >= 0.0)) throw InvalidInput("generate_regression_dataset: noise_scale < 0");
  Lcg64 g(seed);
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double x = 4.0 * i / (count - 1);
    const double z = box_muller(g);
    samples.push_back({x, theta_true.first + theta_true.second * x + noise_scale * z});
  }
  return RegressionObjective(std::move(samples));
}

// ---------------------------------------------------------------------------
// Scenarios

struct QuadraticSpec {
  SymMatrix q;
  Vector b;
  double c = 0.0;
  std::optional<SmoothnessBounds> bounds_override;

  friend bool operator==(const QuadraticSpec&, const QuadraticSpec&) = default;
};

/// Either a CSV file (`csv` non-empty) or the seeded generator.
struct RegressionSpec {
  std::string csv;
  std::uint64_t seed = 42;
  int count = 40;
  double theta0 = 0.46;
  double theta1 = 2.0;
  double noise = 0.3;

  friend bool operator==(const RegressionSpec&, const RegressionSpec&) = default;
};

using ObjectiveSpec = std::variant<QuadraticSpec, RegressionSpec>;

struct MethodSpec {
  std::string name;
  OptimizerConfig config;

  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

struct Seeds {
  Vector x0;
  Vector x1;
  std::optional<Vector> y0;

  friend bool operator==(const Seeds&, const Seeds&) = default;
};

struct StopSpec {
  double epsilon = 1e-8;
  int k_max = 1000;

  friend bool operator==(const StopSpec&, const StopSpec&) = default;
};

struct OutputSpec {
  std::string dir = "out";
  std::string prefix;

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

/// Method configs are fully resolved: [stop] values have already been copied
/// into each config unless the method set its own.
struct Scenario {
  std::string name;
  ObjectiveSpec objective;
  std::vector<MethodSpec> methods;
  Seeds seeds;
  StopSpec stop;
  OutputSpec output;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

using AnyObjective = std::variant<QuadraticObjective, RegressionObjective>;

inline AnyObjective build_objective(const ObjectiveSpec& spec) {
  if (const auto* q = std::get_if<QuadraticSpec>(&spec)) {
    QuadraticObjective f(q->q, q->b, q->c);
    if (q->bounds_override) f = f.with_bounds_override(*q->bounds_override);
    return f;
  }
  const auto& r = std::get<RegressionSpec>(spec);
  if (!r.csv.empty()) return load_regression_csv(r.csv);
  return generate_regression_dataset(r.seed, r.count, {r.theta0, r.theta1}, r.noise);
}

/// Minimizer of the objective: closed form for quadratics, normal equations
/// for regression.
inline Vector solution(const AnyObjective& f) {
  return std::visit(
      [](const auto& g) -> Vector {
        if constexpr (std::is_same_v<std::decay_t<decltype(g)>, QuadraticObjective>)
          return minimizer(g);
        else
          return g.normal_equation_solution();
      },
      f);
}

inline std::size_t dimension(const AnyObjective& f) {
  return std::visit([](const auto& g) { return g.dimension(); }, f);
}

inline double value(const AnyObjective& f, const Vector& x) {
  return std::visit([&](const auto& g) { return g.value(x); }, f);
}

inline SmoothnessBounds bounds(const AnyObjective& f) {
  return std::visit([](const auto& g) { return bounds(g); }, f);
}

inline Trajectory run(const AnyObjective& f, const OptimizerConfig& cfg, const Seeds& s) {
  return std::visit([&](const auto& g) { return run(g, cfg, s.x0, s.x1, s.y0); }, f);
}

struct MethodResult {
  std::string name;
  OptimizerConfig config;
  Trajectory trajectory;
  double final_error = 0.0;
  double final_value = 0.0;
  std::vector<double> errors;  // |x_k - x*| per recorded iterate
  std::optional<RateEstimate> rate;

  /// First index whose error is below tol, if any.
  std::optional<std::size_t> first_below(double tol) const {
    for (std::size_t k = 0; k < errors.size(); ++k)
      if (errors[k] < tol) return k;
    return std::nullopt;
  }
};

struct ScenarioReport {
  std::string scenario;
  Vector x_star;
  double f_star = 0.0;
  SmoothnessBounds bounds;
  std::vector<MethodResult> methods;
  std::vector<std::string> notes;

  const MethodResult& method(std::string_view name) const {
    for (const auto& m : methods)
      if (m.name == name) return m;
    throw InvalidInput("report has no method '" + std::string(name) + "'");
  }
};

inline void validate(const Scenario& s, std::size_t dim) {
  if (s.methods.empty()) throw InvalidConfig("scenario '" + s.name + "' has no methods");
  if (s.seeds.x0.size() != dim || s.seeds.x1.size() != dim)
    throw InvalidConfig("scenario '" + s.name + "': seed dimension does not match objective");
  if (s.seeds.y0 && s.seeds.y0->size() != dim)
    throw InvalidConfig("scenario '" + s.name + "': y0 dimension does not match objective");
  for (const auto& m : s.methods) {
    m.config.validate();
    if (m.config.method == Method::AFOAGD && !s.seeds.y0)
      throw InvalidConfig("scenario '" + s.name + "': method '" + m.name + "' needs seeds.y0");
  }
}

inline MethodResult summarize(const AnyObjective& f, const MethodSpec& m, Trajectory t,
                              const Vector& x_star) {
  MethodResult r{m.name, m.config, std::move(t), 0.0, 0.0, {}, std::nullopt};
  r.errors = distances(r.trajectory, x_star);
  r.final_error = r.errors.back();
  r.final_value = value(f, r.trajectory.iterates.back());
  if (!std::isfinite(r.final_value)) r.final_value = std::numeric_limits<double>::quiet_NaN();
  try {
    r.rate = empirical_rate(r.errors, r.errors.front());
  } catch (const DegenerateFit&) {
  }
  return r;
}

inline ScenarioReport run_scenario(const Scenario& s) {
  const AnyObjective f = build_objective(s.objective);
  validate(s, dimension(f));
  ScenarioReport rep;
  rep.scenario = s.name;
  rep.x_star = solution(f);
  rep.f_star = value(f, rep.x_star);
  rep.bounds = bounds(f);
  for (const auto& m : s.methods)
    rep.methods.push_back(summarize(f, m, run(f, m.config, s.seeds), rep.x_star));
  return rep;
}

// ---------------------------------------------------------------------------
// Built-in simulations

inline OptimizerConfig make_config(Method method, double alpha, const StopSpec& stop) {
  OptimizerConfig c;
  c.method = method;
  c.alpha = alpha;
  c.epsilon = stop.epsilon;
  c.k_max = stop.k_max;
  return c;
}

/// f = 2 x1^2 + 3 x2^2 + 3 with AFOGD, GD and FOGD.
inline Scenario simulation1_scenario() {
  Scenario s;
  s.name = "sim1";
  s.objective = QuadraticSpec{SymMatrix::diagonal({2.0, 3.0}), Vector{0.0, 0.0}, 3.0, {}};
  s.stop = {1e-8, 1000};
  s.seeds = {Vector{0.1, 0.1}, Vector{1.0, 1.0}, std::nullopt};
  s.output = {"out", "sim1"};

  auto afogd = make_config(Method::AFOGD, 0.2, s.stop);
  afogd.mu = 1.7;
  afogd.delta = 1e-4;
  afogd.c1 = 0.8;
  afogd.c2 = 1.3;
  auto gd = make_config(Method::GD, 0.2, s.stop);
  auto fogd = afogd;
  fogd.method = Method::FOGD;
  s.methods = {{"AFOGD", afogd}, {"GD", gd}, {"FOGD", fogd}};
  return s;
}

/// f = 8 x1^2 + 2 x2^2 + 4 x1 + 2 x2 - 1 with AFOAGD, Heavy-ball, GD and FOGD.
inline Scenario simulation2_scenario() {
  Scenario s;
  s.name = "sim2";
  s.objective =
      QuadraticSpec{SymMatrix::diagonal({8.0, 2.0}), Vector{4.0, 2.0}, -1.0, {}};
  s.stop = {1e-8, 1000};
  s.seeds = {Vector{1.2, 1.2}, Vector{-1.12, 0.52}, Vector{-1.12, 0.52}};
  s.output = {"out", "sim2"};

  auto afoagd = make_config(Method::AFOAGD, 0.1, s.stop);
  afoagd.eta = 0.2;
  afoagd.mu = 1.7;
  afoagd.delta = 1e-4;
  afoagd.c1 = 0.5;
  afoagd.c2 = 1.0;
  auto hb = make_config(Method::HeavyBall, 0.1, s.stop);
  hb.gamma = 0.2;
  auto gd = make_config(Method::GD, 0.1, s.stop);
  auto fogd = make_config(Method::FOGD, 0.1, s.stop);
  fogd.mu = 1.7;
  fogd.delta = 1e-4;
  s.methods = {{"AFOAGD", afoagd}, {"HeavyBall", hb}, {"GD", gd}, {"FOGD", fogd}};
  return s;
}

/// Least-squares line fit on 40 generated points with AFOAGD and Nesterov.
inline Scenario simulation3_scenario() {
  Scenario s;
  s.name = "sim3";
  s.objective = RegressionSpec{};
  s.stop = {1e-10, 2000};
  s.seeds = {Vector{0.1, 0.8}, Vector{0.0, 0.0}, Vector{0.0, 0.0}};
  s.output = {"out", "sim3"};

  auto afoagd = make_config(Method::AFOAGD, 0.2, s.stop);
  afoagd.eta = 0.1;
  afoagd.mu = 0.8;
  afoagd.delta = 1e-4;
  afoagd.c1 = 1.3;
  afoagd.c2 = 2.0;
  auto nes = make_config(Method::Nesterov, 0.2, s.stop);
  nes.eta = 0.1;
  s.methods = {{"AFOAGD", afoagd}, {"Nesterov", nes}};
  return s;
}

inline std::optional<Scenario> builtin_scenario(std::string_view name) {
  if (name == "sim1") return simulation1_scenario();
  if (name == "sim2") return simulation2_scenario();
  if (name == "sim3") return simulation3_scenario();
  return std::nullopt;
}

struct SimulationOverrides {
  std::optional<double> alpha_gd;  // simulation 1 only
  std::optional<double> epsilon;
  std::optional<int> k_max;
  std::optional<std::string> dataset_csv;  // simulation 3 only
  bool search_certificate = false;          // simulation 2 only
};

inline void apply_stop(Scenario& s, const SimulationOverrides& o) {
  if (o.epsilon) s.stop.epsilon = *o.epsilon;
  if (o.k_max) s.stop.k_max = *o.k_max;
  for (auto& m : s.methods) {
    if (o.epsilon) m.config.epsilon = *o.epsilon;
    if (o.k_max) m.config.k_max = *o.k_max;
  }
}

/// Records which GD step size the run used; the source leaves it unstated.
inline void annotate_simulation1(ScenarioReport& r, bool overridden) {
  for (const auto& m : r.methods) {
    if (m.config.method != Method::GD) continue;
    char buf[96];
    std::snprintf(buf, sizeof buf, "GD step size alpha_GD = %.17g (%s)", m.config.alpha,
                  overridden ? "overridden" : "default, same as AFOGD");
    r.notes.emplace_back(buf);
  }
}

inline ScenarioReport run_simulation1(const SimulationOverrides& o = {}) {
  Scenario s = simulation1_scenario();
  apply_stop(s, o);
  if (o.alpha_gd)
    for (auto& m : s.methods)
      if (m.config.method == Method::GD) m.config.alpha = *o.alpha_gd;
  ScenarioReport r = run_scenario(s);
  annotate_simulation1(r, o.alpha_gd.has_value());
  return r;
}

/// The Simulation-2 LMI fixtures with the stated (m, L) = (2, 8).
struct PublishedFixtures {
  ProblemParams params{2.0, 8.0, 0.1, 0.2, 0.5, 1.0};
  SymMatrix p1{{1.8345, -1.6390}, {-1.6390, 7.0917}};
  SymMatrix p2{{4.1074, -4.1697}, {-4.1697, 4.6191}};
  double rho_sq_p1 = 0.8;
  double rho_sq_p2 = 0.4;
  double h = 0.2;
  double tol = 1e-6;
};

/// One assignment of the (P1, P2) fixtures to the two psi cases.
struct FixturePairing {
  std::string label;
  Theorem2Certificate certificate;
  Theorem2Verdict verdict;
  double total_violation = 0.0;  // sum of positive LMI max eigenvalues
};

inline FixturePairing evaluate_pairing(const PublishedFixtures& fx, bool p1_nonneg, double tol) {
  const Certificate c1{fx.p1, fx.rho_sq_p1, fx.h, CaseTag::Theorem2Nonneg};
  const Certificate c2{fx.p2, fx.rho_sq_p2, fx.h, CaseTag::Theorem2Nonneg};
  FixturePairing fp;
  fp.label = p1_nonneg ? "nonneg=P1(rho^2=0.8), neg=P2(rho^2=0.4)"
                       : "nonneg=P2(rho^2=0.4), neg=P1(rho^2=0.8)";
  fp.certificate.nonneg = p1_nonneg ? c1 : c2;
  fp.certificate.neg = p1_nonneg ? c2 : c1;
  fp.certificate.neg.case_tag = CaseTag::Theorem2Neg;
  fp.verdict = check_certificate(fx.params, fp.certificate, tol);
  fp.total_violation = std::max(0.0, fp.verdict.nonneg.lmi_max_eigenvalue) +
                       std::max(0.0, fp.verdict.neg.lmi_max_eigenvalue);
  return fp;
}

/// Both pairings, plus the index of the one to use: a feasible pairing if
/// any, otherwise the one with the smaller total violation.
struct FixtureAnalysis {
  std::array<FixturePairing, 2> pairings;
  std::size_t chosen = 0;

  const FixturePairing& best() const { return pairings[chosen]; }
};

inline FixtureAnalysis analyze_fixtures(const PublishedFixtures& fx, double tol) {
  FixtureAnalysis a{{evaluate_pairing(fx, false, tol), evaluate_pairing(fx, true, tol)}, 0};
  const bool v0 = a.pairings[0].verdict.valid, v1 = a.pairings[1].verdict.valid;
  if (v0 != v1)
    a.chosen = v1 ? 1 : 0;
  else
    a.chosen = a.pairings[1].total_violation < a.pairings[0].total_violation ? 1 : 0;
  return a;
}

struct Simulation2Report {
  ScenarioReport run;
  PublishedFixtures fixtures;
  FixtureAnalysis at_fixture_tol;  // 1e-6
  FixtureAnalysis at_loose_tol;    // 1e-2
  double certified_rho = 0.0;      // sqrt of the larger fixture rho^2
  std::optional<Theorem2Certificate> searched;
};

inline Simulation2Report analyze_simulation2(ScenarioReport run, bool search) {
  Simulation2Report r;
  r.run = std::move(run);
  r.at_fixture_tol = analyze_fixtures(r.fixtures, r.fixtures.tol);
  r.at_loose_tol = analyze_fixtures(r.fixtures, 1e-2);
  r.certified_rho = std::sqrt(std::max(r.fixtures.rho_sq_p1, r.fixtures.rho_sq_p2));
  if (search) r.searched = search_theorem2(r.fixtures.params, default_search_grids());
  char buf[160];
  std::snprintf(buf, sizeof buf, "certificate params use the stated (m, L) = (2, 8); "
                "the Hessian gives (m, L) = (%.17g, %.17g)", r.run.bounds.m, r.run.bounds.L);
  r.run.notes.emplace_back(buf);
  return r;
}

inline Simulation2Report run_simulation2(const SimulationOverrides& o = {}) {
  Scenario s = simulation2_scenario();
  apply_stop(s, o);
  return analyze_simulation2(run_scenario(s), o.search_certificate);
}

struct Simulation3Report {
  ScenarioReport run;
  Vector theta_ls;
  double j_ls = 0.0;
  /// First iteration with J(theta_k) - J* < 1e-6, per method (same order as run.methods).
  std::vector<std::optional<std::size_t>> crossing;
  /// Published optima on the unpublished dataset, kept for reference only.
  std::vector<std::pair<std::string, Vector>> reference_optima{
      {"AFOAGD", Vector{0.4619, 1.9971}}, {"Nesterov", Vector{0.4617, 1.9970}}};
};

inline constexpr double kSim3ValueTol = 1e-6;

inline Simulation3Report analyze_simulation3(ScenarioReport run) {
  Simulation3Report r;
  r.run = std::move(run);
  r.theta_ls = r.run.x_star;
  r.j_ls = r.run.f_star;
  for (const auto& m : r.run.methods) {
    std::optional<std::size_t> cross;
    for (std::size_t k = 0; k < m.trajectory.values.size(); ++k)
      if (m.trajectory.values[k] - r.j_ls < kSim3ValueTol) {
        cross = k;
        break;
      }
    r.crossing.push_back(cross);
  }
  r.run.notes.emplace_back("published optima are reference values on a different dataset");
  return r;
}

inline Simulation3Report run_simulation3(const SimulationOverrides& o = {}) {
  Scenario s = simulation3_scenario();
  apply_stop(s, o);
  if (o.dataset_csv) std::get<RegressionSpec>(s.objective).csv = *o.dataset_csv;
  return analyze_simulation3(run_scenario(s));
}

// ---------------------------------------------------------------------------
// Export

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string config_comment(std::string_view name, const OptimizerConfig& c) {
  std::ostringstream os;
  os << "# method=" << name << " kind=" << to_string(c.method)
     << " alpha=" << format_double(c.alpha) << " eta=" << format_double(c.eta)
     << " gamma=" << format_double(c.gamma) << " mu=" << format_double(c.mu)
     << " delta=" << format_double(c.delta) << " c1=" << format_double(c.c1)
     << " c2=" << format_double(c.c2) << " epsilon=" << format_double(c.epsilon)
     << " k_max=" << c.k_max;
  return os.str();
}

inline void write_trajectory_csv(std::ostream& os, std::string_view name,
                                 const OptimizerConfig& cfg, const Trajectory& t) {
  os << config_comment(name, cfg) << " stop=" << to_string(t.stop_reason) << '\n';
  const std::size_t n = t.iterates.empty() ? 0 : t.iterates.front().size();
  os << 'k';
  for (std::size_t i = 0; i < n; ++i) os << ",x" << i;
  os << ",f,grad_norm,multiplier\n";
  for (std::size_t k = 0; k < t.size(); ++k) {
    os << k;
    for (double v : t.iterates[k]) os << ',' << format_double(v);
    os << ',' << format_double(t.values[k]) << ',' << format_double(t.grad_norms[k]) << ','
       << format_double(t.multipliers[k]) << '\n';
  }
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

inline void write_trajectory_csv(const std::filesystem::path& path, std::string_view name,
                                 const OptimizerConfig& cfg, const Trajectory& t) {
  auto out = open_for_write(path);
  write_trajectory_csv(out, name, cfg, t);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Parses a trajectory CSV written by write_trajectory_csv. The stop reason
/// is recovered from the comment line.
inline Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  Trajectory t;
  std::string line;
  int line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find(" stop=");
      if (pos != std::string::npos) {
        const std::string r = line.substr(pos + 6);
        if (r == "GradientTolerance") t.stop_reason = StopReason::GradientTolerance;
        else if (r == "MaxIterations") t.stop_reason = StopReason::MaxIterations;
        else if (r == "NonFinite") t.stop_reason = StopReason::NonFinite;
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (columns == 0) {
      if (cells.size() < 5 || cells.front() != "k")
        throw ParseError(path.string(), line_no, "", "bad trajectory header");
      columns = cells.size();
      continue;
    }
    if (cells.size() != columns)
      throw ParseError(path.string(), line_no, "", "wrong number of columns");
    std::vector<double> nums;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      // from_chars keeps subnormals and accepts nan/inf; "-nan" is printf's spelling
      const std::string& c = cells[i];
      double v = 0.0;
      const char* first = c.data() + (c == "-nan" ? 1 : 0);
      const auto [ptr, ec] = std::from_chars(first, c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size() || c.empty())
        throw ParseError(path.string(), line_no, "", "malformed number '" + c + "'");
      nums.push_back(v);
    }
    const std::size_t dim = nums.size() - 3;
    t.iterates.emplace_back(std::vector<double>(nums.begin(), nums.begin() + dim));
    t.values.push_back(nums[dim]);
    t.grad_norms.push_back(nums[dim + 1]);
    t.multipliers.push_back(nums[dim + 2]);
  }
  if (columns == 0) throw ParseError(path.string(), line_no, "", "missing header");
  return t;
}

inline nlohmann::json to_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.begin(), v.end()));
}

inline nlohmann::json to_json(const OptimizerConfig& c) {
  return {{"method", to_string(c.method)}, {"alpha", c.alpha}, {"eta", c.eta},
          {"gamma", c.gamma}, {"mu", c.mu}, {"delta", c.delta}, {"c1", c.c1},
          {"c2", c.c2}, {"epsilon", c.epsilon}, {"k_max", c.k_max}};
}

inline nlohmann::json to_json(const ScenarioReport& r) {
  nlohmann::json j;
  j["scenario"] = r.scenario;
  j["x_star"] = to_json(r.x_star);
  j["f_star"] = r.f_star;
  j["bounds"] = {{"m", r.bounds.m}, {"L", r.bounds.L}};
  j["methods"] = nlohmann::json::array();
  for (const auto& m : r.methods) {
    nlohmann::json e{{"name", m.name},
                     {"config", to_json(m.config)},
                     {"stop_reason", to_string(m.trajectory.stop_reason)},
                     {"steps", m.trajectory.steps()},
                     {"final_x", to_json(m.trajectory.iterates.back())},
                     {"final_error", m.final_error},
                     {"final_value", m.final_value}};
    const auto hit = m.first_below(1e-6);
    e["first_error_below_1e-6"] = hit ? nlohmann::json(*hit) : nlohmann::json(nullptr);
    if (m.rate)
      e["rate"] = {{"rho_emp", m.rate->rho_emp}, {"c_emp", m.rate->c_emp},
                   {"fit_window", {m.rate->fit_first, m.rate->fit_last}},
                   {"residual", m.rate->residual}};
    else
      e["rate"] = nullptr;
    j["methods"].push_back(std::move(e));
  }
  j["notes"] = r.notes;
  return j;
}

inline nlohmann::json to_json(const CertificateReport& c) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"valid", c.valid()}, {"p_positive_definite", c.p_positive_definite},
          {"p_min_eigenvalue", num(c.p_min_eigenvalue)},
          {"lmi_max_eigenvalue", num(c.lmi_max_eigenvalue)}, {"lmi_holds", c.lmi_holds}};
}

inline nlohmann::json to_json(const FixtureAnalysis& a) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i = 0; i < a.pairings.size(); ++i) {
    const auto& p = a.pairings[i];
    j.push_back({{"pairing", p.label}, {"chosen", i == a.chosen},
                 {"valid", p.verdict.valid}, {"total_violation", p.total_violation},
                 {"nonneg", to_json(p.verdict.nonneg)}, {"neg", to_json(p.verdict.neg)}});
  }
  return j;
}

inline nlohmann::json to_json(const Simulation2Report& r) {
  nlohmann::json j = to_json(r.run);
  j["fixtures"] = {{"tol_1e-6", to_json(r.at_fixture_tol)}, {"tol_1e-2", to_json(r.at_loose_tol)}};
  j["certified_rho"] = r.certified_rho;
  for (const auto& m : r.run.methods)
    if (m.config.method == Method::AFOAGD && m.rate)
      j["empirical_rho_afoagd"] = m.rate->rho_emp;
  if (r.searched) {
    auto cert = [](const Certificate& c) {
      return nlohmann::json{{"rho_sq", c.rho_sq}, {"h", c.h},
                            {"p", {c.p(0, 0), c.p(0, 1), c.p(1, 0), c.p(1, 1)}}};
    };
    j["searched"] = {{"nonneg", cert(r.searched->nonneg)}, {"neg", cert(r.searched->neg)}};
  }
  return j;
}

inline nlohmann::json to_json(const Simulation3Report& r) {
  nlohmann::json j = to_json(r.run);
  j["theta_ls"] = to_json(r.theta_ls);
  j["j_ls"] = r.j_ls;
  j["first_value_gap_below_1e-6"] = nlohmann::json::array();
  for (const auto& c : r.crossing)
    j["first_value_gap_below_1e-6"].push_back(c ? nlohmann::json(*c) : nlohmann::json(nullptr));
  j["reference_optima"] = nlohmann::json::object();
  for (const auto& [name, v] : r.reference_optima) j["reference_optima"][name] = to_json(v);
  return j;
}

inline std::string file_prefix(const ScenarioReport& r, const OutputSpec& o) {
  return o.prefix.empty() ? r.scenario : o.prefix;
}

/// Writes <prefix>_<method>.csv per method and <prefix>_summary.json; returns
/// the written paths in that order.
inline std::vector<std::filesystem::path> export_report(const ScenarioReport& r,
                                                        const nlohmann::json& summary,
                                                        const std::filesystem::path& dir,
                                                        const std::string& prefix) {
  std::vector<std::filesystem::path> written;
  for (const auto& m : r.methods) {
    auto path = dir / (prefix + "_" + m.name + ".csv");
    write_trajectory_csv(path, m.name, m.config, m.trajectory);
    written.push_back(std::move(path));
  }
  auto path = dir / (prefix + "_summary.json");
  auto out = open_for_write(path);
  out << summary.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
  written.push_back(std::move(path));
  return written;
}

inline std::vector<std::filesystem::path> export_report(const ScenarioReport& r,
                                                        const std::filesystem::path& dir,
                                                        const std::string& prefix) {
  return export_report(r, to_json(r), dir, prefix);
}

// ---------------------------------------------------------------------------
// Sweeps

inline const std::vector<std::string>& sweep_parameter_names() {
  static const std::vector<std::string> names{"alpha", "eta",     "gamma", "mu",   "delta",
                                              "c1",    "c2",      "epsilon", "k_max"};
  return names;
}

inline void set_parameter(OptimizerConfig& c, std::string_view name, double v) {
  if (name == "alpha") c.alpha = v;
  else if (name == "eta") c.eta = v;
  else if (name == "gamma") c.gamma = v;
  else if (name == "mu") c.mu = v;
  else if (name == "delta") c.delta = v;
  else if (name == "c1") c.c1 = v;
  else if (name == "c2") c.c2 = v;
  else if (name == "epsilon") c.epsilon = v;
  else if (name == "k_max") {
    if (v != std::floor(v) || v < 1 || v > std::numeric_limits<int>::max())
      throw InvalidConfig("k_max must be a positive integer");
    c.k_max = static_cast<int>(v);
  } else {
    throw InvalidConfig("unknown sweep parameter '" + std::string(name) + "'");
  }
}

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct SweepRow {
  std::vector<double> key;  // one value per axis, in axis order
  OptimizerConfig config;
  Trajectory trajectory;
  double final_error = 0.0;
  double final_value = 0.0;
  std::optional<double> certified_rho;  // closed-form AFOGD rate when requested
  std::string error;                    // non-empty if this run threw
};

struct SweepResult {
  std::vector<SweepAxis> axes;
  std::string method;
  std::vector<SweepRow> rows;  // cross-product order, last axis fastest
};

/// Runs the cross product of the axes for one method of the scenario. Runs
/// execute concurrently; rows are stored by their cross-product index.
inline SweepResult run_sweep(const Scenario& s, std::size_t method_index,
                             const std::vector<SweepAxis>& axes, bool certify) {
  if (axes.empty()) throw InvalidConfig("sweep: no parameters given");
  if (method_index >= s.methods.size()) throw InvalidConfig("sweep: method index out of range");
  std::size_t total = 1;
  for (const auto& a : axes) {
    if (a.values.empty()) throw InvalidConfig("sweep: empty grid for '" + a.name + "'");
    OptimizerConfig probe;
    set_parameter(probe, a.name, a.values.front());
    total *= a.values.size();
  }

  const AnyObjective f = build_objective(s.objective);
  validate(s, dimension(f));
  const Vector x_star = solution(f);
  const SmoothnessBounds b = bounds(f);
  const MethodSpec& base = s.methods[method_index];

  SweepResult result{axes, base.name, std::vector<SweepRow>(total)};
  std::vector<std::future<SweepRow>> jobs;
  jobs.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<double> key(axes.size());
    std::size_t rest = idx;
    for (std::size_t a = axes.size(); a-- > 0;) {
      key[a] = axes[a].values[rest % axes[a].values.size()];
      rest /= axes[a].values.size();
    }
    jobs.push_back(std::async(std::launch::async, [&, key]() {
      SweepRow row;
      row.key = key;
      row.config = base.config;
      try {
        for (std::size_t a = 0; a < axes.size(); ++a)
          set_parameter(row.config, axes[a].name, key[a]);
        row.trajectory = run(f, row.config, s.seeds);
        row.final_error = norm(row.trajectory.iterates.back() - x_star);
        row.final_value = row.trajectory.values.back();
        if (certify && b.m > 0.0) {
          const ProblemParams p{b.m, b.L, row.config.alpha, row.config.eta, row.config.c1,
                                row.config.c2};
          try {
            row.certified_rho = std::sqrt(theorem1_rate(p).rho_sq_min);
          } catch (const Error&) {
          }
        }
      } catch (const Error& e) {
        row.error = e.what();
      }
      return row;
    }));
  }
  for (std::size_t i = 0; i < total; ++i) result.rows[i] = jobs[i].get();
  return result;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r, bool certify) {
  for (const auto& a : r.axes) os << a.name << ',';
  os << "method,stop_reason,steps,final_error,final_value";
  if (certify) os << ",certified_rho";
  os << ",error\n";
  for (const auto& row : r.rows) {
    for (double v : row.key) os << format_double(v) << ',';
    os << r.method << ',';
    if (row.error.empty()) {
      os << to_string(row.trajectory.stop_reason) << ',' << row.trajectory.steps() << ','
         << format_double(row.final_error) << ',' << format_double(row.final_value);
    } else {
      os << ",,,";
    }
    if (certify) os << ',' << (row.certified_rho ? format_double(*row.certified_rho) : "");
    std::string err = row.error;
    std::replace(err.begin(), err.end(), ',', ';');
    os << ',' << err << '\n';
  }
}

}  // namespace afgd
