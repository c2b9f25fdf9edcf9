#pragma once

// Command-line front end: run, certify, search, sweep, regress.
//
// Exit codes: 0 success (or valid certificate), 1 runtime failure or invalid
// certificate, 2 usage or configuration error.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "afgd/certificates.hpp"
#include "afgd/certificates_io.hpp"
#include "afgd/error.hpp"
#include "afgd/harness.hpp"
#include "afgd/optimizers.hpp"
#include "afgd/scenario_file.hpp"

namespace afgd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kOutDirEnv = "AFGD_OUT_DIR";

/// Configuration problem detected while reading inputs; maps to exit 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Comma-separated decimal list, e.g. "0.1,0.1" or "1e-3, 2".
inline std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string cell; std::getline(ss, cell, ',');) {
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    if (b == std::string::npos) throw UsageError(flag + ": empty entry in '" + text + "'");
    cell = cell.substr(b, e - b + 1);
    double d = 0.0;
    const char* first = cell.data() + (cell.front() == '+' ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), d);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(d))
      throw UsageError(flag + ": malformed number '" + cell + "'");
    v.push_back(d);
  }
  return v;
}

/// Method-level flags shared by run, sweep and regress.
struct Overrides {
  std::string method;
  std::optional<double> alpha, eta, gamma, mu, delta, c1, c2, epsilon;
  std::optional<int> k_max;
  std::string seed_x0, seed_x1, seed_y0;

  void attach(CLI::App& app) {
    app.add_option("--method", method,
                   "Restrict to one method (scenario name or kind: gd, hb, nesterov, fogd, "
                   "afogd, afoagd)");
    app.add_option("--alpha", alpha, "Step scale");
    app.add_option("--eta", eta, "Extrapolation weight");
    app.add_option("--gamma", gamma, "Heavy-ball momentum");
    app.add_option("--mu", mu, "Fractional order in (0, 2)");
    app.add_option("--delta", delta, "Fractional regularizer > 0");
    app.add_option("--c1", c1, "Lower clamp bound on the fractional multiplier");
    app.add_option("--c2", c2, "Upper clamp bound on the fractional multiplier");
    app.add_option("--epsilon", epsilon, "Gradient-norm stopping threshold");
    app.add_option("--k-max", k_max, "Iteration limit");
    app.add_option("--seed-x0", seed_x0, "First seed, comma separated");
    app.add_option("--seed-x1", seed_x1, "Second seed, comma separated");
    app.add_option("--seed-y0", seed_y0, "Initial extrapolated point (AFOAGD)");
  }

  void apply(Scenario& s) const {
    if (!method.empty()) {
      std::vector<MethodSpec> kept;
      std::string lowered = method;
      std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      for (const auto& m : s.methods) {
        std::string name = m.name;
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        bool kind_match = false;
        try {
          kind_match = parse_method(method) == m.config.method;
        } catch (const InvalidConfig&) {
        }
        if (name == lowered || kind_match) kept.push_back(m);
      }
      if (kept.empty())
        throw UsageError("--method: scenario '" + s.name + "' has no method '" + method + "'");
      s.methods = std::move(kept);
    }
    for (auto& m : s.methods) {
      auto& c = m.config;
      if (alpha) c.alpha = *alpha;
      if (eta) c.eta = *eta;
      if (gamma) c.gamma = *gamma;
      if (mu) c.mu = *mu;
      if (delta) c.delta = *delta;
      if (c1) c.c1 = *c1;
      if (c2) c.c2 = *c2;
      if (epsilon) c.epsilon = *epsilon;
      if (k_max) c.k_max = *k_max;
    }
    if (epsilon) s.stop.epsilon = *epsilon;
    if (k_max) s.stop.k_max = *k_max;
    if (!seed_x0.empty()) s.seeds.x0 = Vector(parse_list(seed_x0, "--seed-x0"));
    if (!seed_x1.empty()) s.seeds.x1 = Vector(parse_list(seed_x1, "--seed-x1"));
    if (!seed_y0.empty()) s.seeds.y0 = Vector(parse_list(seed_y0, "--seed-y0"));
  }
};

/// Built-in name (sim1, sim2, sim3) or a scenario file path.
inline Scenario resolve_scenario(const std::string& ref) {
  if (auto s = builtin_scenario(ref)) return *s;
  if (!std::filesystem::exists(ref))
    throw UsageError("scenario '" + ref + "' not found (expected a file or sim1/sim2/sim3)");
  return load_scenario(ref);
}

/// --out, then $AFGD_OUT_DIR, then the scenario's own setting.
inline std::filesystem::path output_dir(const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return fallback;
}

inline void print_report(std::ostream& out, const ScenarioReport& r) {
  out << "scenario " << r.scenario << "  x* = (";
  for (std::size_t i = 0; i < r.x_star.size(); ++i)
    out << (i ? ", " : "") << format_double(r.x_star[i]);
  out << ")  f* = " << format_double(r.f_star) << '\n';
  for (const auto& m : r.methods) {
    out << "  " << m.name << ": " << to_string(m.trajectory.stop_reason)
        << " after " << m.trajectory.steps() << " steps, |x - x*| = "
        << format_double(m.final_error);
    if (m.rate) out << ", rho_emp = " << format_double(m.rate->rho_emp);
    out << '\n';
  }
  for (const auto& n : r.notes) out << "  note: " << n << '\n';
}

inline void print_written(std::ostream& out, const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) out << "wrote " << f.string() << '\n';
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive fractional-order gradient methods: runs, convergence certificates, "
               "parameter sweeps."};
  app.require_subcommand(1);
  const std::string footer =
      std::string("Environment:\n  ") + kOutDirEnv +
      "  output directory used when --out is not given\n"
      "Exit codes: 0 success, 1 runtime failure or invalid certificate, 2 usage error";
  app.footer(footer);

  // run
  auto* run = app.add_subcommand("run", "Run a scenario file or built-in simulation");
  std::string run_scenario_ref, run_out;
  Overrides run_over;
  run->add_option("scenario", run_scenario_ref, "Scenario file, or sim1 / sim2 / sim3")
      ->required();
  run->add_option("--out", run_out, "Output directory");
  run_over.attach(*run);

  // certify
  auto* certify = app.add_subcommand("certify", "Check a certificate document");
  std::string cert_path;
  std::optional<double> cm, cL, calpha, ceta, cc1, cc2, ctol;
  certify->add_option("--cert", cert_path, "Certificate JSON file")->required();
  certify->add_option("--m", cm, "Override strong-convexity modulus");
  certify->add_option("--L", cL, "Override gradient Lipschitz constant");
  certify->add_option("--alpha", calpha, "Override step scale");
  certify->add_option("--eta", ceta, "Override extrapolation weight");
  certify->add_option("--c1", cc1, "Override lower clamp bound");
  certify->add_option("--c2", cc2, "Override upper clamp bound");
  certify->add_option("--tol", ctol, "NSD tolerance (default: the document's)");

  // search
  auto* search = app.add_subcommand("search", "Find a certificate for given parameters");
  ProblemParams sp{0.0, 0.0, 0.0, 0.0, 1.0, 1.0};
  std::string search_method = "afoagd", search_out;
  double search_tol = kNsdTolerance;
  bool search_common = false;
  search->add_option("--m", sp.m, "Strong-convexity modulus")->required();
  search->add_option("--L", sp.L, "Gradient Lipschitz constant")->required();
  search->add_option("--alpha", sp.alpha, "Step scale")->required();
  search->add_option("--eta", sp.eta, "Extrapolation weight (AFOAGD)");
  search->add_option("--c1", sp.c1, "Lower clamp bound");
  search->add_option("--c2", sp.c2, "Upper clamp bound");
  search->add_option("--method", search_method, "afoagd (grid search) or afogd (closed form)");
  search->add_option("--tol", search_tol, "NSD tolerance");
  search->add_flag("--common", search_common, "Require one (P, rho^2, h) for both cases");
  search->add_option("--out", search_out, "Certificate file to write");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Cross-product parameter sweep over one method");
  std::string sweep_ref, sweep_out;
  std::vector<std::string> sweep_params;
  bool sweep_certify = false;
  Overrides sweep_over;
  sweep->add_option("scenario", sweep_ref, "Scenario file, or sim1 / sim2 / sim3")->required();
  sweep->add_option("--param", sweep_params, "name=v1,v2,... (repeatable)")->required();
  sweep->add_flag("--certify", sweep_certify, "Add the closed-form certified rate column");
  sweep->add_option("--out", sweep_out, "Output directory");
  sweep_over.attach(*sweep);

  // regress
  auto* regress = app.add_subcommand("regress", "Least-squares line fit by AFOAGD and Nesterov");
  std::string reg_data, reg_theta = "0.46,2.0", reg_out;
  std::uint64_t reg_seed = 42;
  int reg_count = 40;
  double reg_noise = 0.3;
  Overrides reg_over;
  regress->add_option("--data", reg_data, "CSV dataset with header x,y");
  regress->add_option("--seed", reg_seed, "Generator seed");
  regress->add_option("--count", reg_count, "Generated sample count");
  regress->add_option("--theta", reg_theta, "Generator line: intercept,slope");
  regress->add_option("--noise", reg_noise, "Generator noise scale");
  regress->add_option("--out", reg_out, "Output directory");
  reg_over.attach(*regress);

  for (auto* sub : {run, certify, search, sweep, regress}) sub->footer(footer);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) {
      Scenario s = resolve_scenario(run_scenario_ref);
      run_over.apply(s);
      ScenarioReport r = run_scenario(s);
      // the three simulations (built in or loaded from file) carry their extra
      // analysis into the summary
      nlohmann::json summary;
      if (s.name == "sim1") {
        annotate_simulation1(r, run_over.alpha.has_value());
        summary = to_json(r);
      } else if (s.name == "sim2") {
        auto a = analyze_simulation2(std::move(r), false);
        r = a.run;
        summary = to_json(a);
      } else if (s.name == "sim3") {
        auto a = analyze_simulation3(std::move(r));
        r = a.run;
        summary = to_json(a);
      } else {
        summary = to_json(r);
      }
      print_report(out, r);
      const auto dir = output_dir(run_out, s.output.dir);
      print_written(out, export_report(r, summary, dir, file_prefix(r, s.output)));
      return kExitOk;
    }

    if (*certify) {
      if (!std::filesystem::exists(cert_path))
        throw UsageError("certificate '" + cert_path + "' not found");
      CertificateDocument doc = read_certificate_file(cert_path);
      if (cm) doc.params.m = *cm;
      if (cL) doc.params.L = *cL;
      if (calpha) doc.params.alpha = *calpha;
      if (ceta) doc.params.eta = *ceta;
      if (cc1) doc.params.c1 = *cc1;
      if (cc2) doc.params.c2 = *cc2;
      if (ctol) doc.tol = *ctol;
      try {
        doc.params.validate();
      } catch (const InvalidInput& e) {
        throw UsageError(e.what());
      }
      bool all_valid = true;
      double worst_rho_sq = 0.0;
      bool has_nonneg = false, has_neg = false;
      for (const auto& c : doc.certificates) {
        const auto rep = evaluate_certificate(doc.params, c, doc.tol);
        all_valid = all_valid && rep.valid();
        worst_rho_sq = std::max(worst_rho_sq, c.rho_sq);
        has_nonneg = has_nonneg || c.case_tag == CaseTag::Theorem2Nonneg;
        has_neg = has_neg || c.case_tag == CaseTag::Theorem2Neg;
        out << to_string(c.case_tag) << ": " << (rep.valid() ? "valid" : "INVALID")
            << "  rho^2 = " << format_double(c.rho_sq) << "  h = " << format_double(c.h);
        if (!rep.rho_in_range) out << "  (rho^2 outside (0, 1))";
        if (!rep.h_nonnegative) out << "  (h < 0)";
        if (rep.rho_in_range && rep.h_nonnegative) {
          out << "  min eig P = " << format_double(rep.p_min_eigenvalue)
              << "  max eig LMI = " << format_double(rep.lmi_max_eigenvalue);
          if (!rep.p_positive_definite) out << "  (P not positive definite)";
          if (!rep.lmi_holds) out << "  (LMI violated at tol " << format_double(doc.tol) << ")";
        }
        out << '\n';
      }
      if (has_nonneg != has_neg)
        out << "note: only one psi case present; a full AFOAGD certificate needs both\n";
      if (all_valid) out << "certified rho = " << format_double(std::sqrt(worst_rho_sq)) << '\n';
      out << "verdict: " << (all_valid ? "valid" : "invalid") << '\n';
      return all_valid ? kExitOk : kExitFailure;
    }

    if (*search) {
      try {
        sp.validate();
      } catch (const InvalidInput& e) {
        throw UsageError(e.what());
      }
      CertificateDocument doc{sp, search_tol, {}};
      const Method m = parse_method(search_method);
      if (m == Method::AFOGD) {
        try {
          const auto rate = theorem1_rate(sp);
          out << "closed form: alpha_max = " << format_double(rate.alpha_max)
              << ", rho^2 >= " << format_double(rate.rho_sq_min) << '\n';
          doc.certificates.push_back(theorem1_certificate(sp));
        } catch (const NoCertificate& e) {
          err << "infeasible: " << e.what() << '\n';
          return kExitFailure;
        }
      } else if (m == Method::AFOAGD) {
        SearchGrids g = default_search_grids();
        g.tol = search_tol;
        const auto found = search_common ? search_common_certificate(sp, g) : search_theorem2(sp, g);
        if (!found) {
          err << "infeasible: no certificate on the search grid\n";
          return kExitFailure;
        }
        doc.certificates = {found->nonneg, found->neg};
      } else {
        throw UsageError("search supports --method afogd or afoagd");
      }
      double worst = 0.0;
      for (const auto& c : doc.certificates) {
        out << to_string(c.case_tag) << ": rho^2 = " << format_double(c.rho_sq)
            << "  h = " << format_double(c.h) << '\n';
        worst = std::max(worst, c.rho_sq);
      }
      out << "certified rho = " << format_double(std::sqrt(worst)) << '\n';
      const std::filesystem::path path =
          search_out.empty() ? output_dir("", "out") / "certificate.json"
                             : std::filesystem::path(search_out);
      write_certificate_file(path, doc);
      out << "wrote " << path.string() << '\n';
      return kExitOk;
    }

    if (*sweep) {
      Scenario s = resolve_scenario(sweep_ref);
      sweep_over.apply(s);
      std::vector<SweepAxis> axes;
      for (const auto& p : sweep_params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0)
          throw UsageError("--param expects name=v1,v2,... (got '" + p + "')");
        SweepAxis a{p.substr(0, eq), {}};
        const std::string values = p.substr(eq + 1);
        if (values.empty()) throw UsageError("--param " + a.name + ": empty grid");
        a.values = parse_list(values, "--param " + a.name);
        axes.push_back(std::move(a));
      }
      const SweepResult res = run_sweep(s, 0, axes, sweep_certify);
      write_sweep_csv(out, res, sweep_certify);
      const auto dir = output_dir(sweep_out, s.output.dir);
      const std::string prefix = s.output.prefix.empty() ? s.name : s.output.prefix;
      const auto path = dir / (prefix + "_sweep.csv");
      auto file = open_for_write(path);
      write_sweep_csv(file, res, sweep_certify);
      if (!file) throw IoError("write failed for '" + path.string() + "'");
      out << "wrote " << path.string() << '\n';
      for (const auto& row : res.rows)
        if (!row.error.empty()) return kExitFailure;
      return kExitOk;
    }

    if (*regress) {
      Scenario s = simulation3_scenario();
      auto& spec = std::get<RegressionSpec>(s.objective);
      if (!reg_data.empty()) {
        if (!std::filesystem::exists(reg_data))
          throw UsageError("dataset '" + reg_data + "' not found");
        spec.csv = reg_data;
      } else {
        const auto th = parse_list(reg_theta, "--theta");
        if (th.size() != 2) throw UsageError("--theta expects intercept,slope");
        spec.seed = reg_seed;
        spec.count = reg_count;
        spec.theta0 = th[0];
        spec.theta1 = th[1];
        spec.noise = reg_noise;
      }
      reg_over.apply(s);
      const ScenarioReport r = run_scenario(s);
      print_report(out, r);
      out << "normal equations: theta = (" << format_double(r.x_star[0]) << ", "
          << format_double(r.x_star[1]) << ")  J = " << format_double(r.f_star) << '\n';
      for (const auto& m : r.methods) {
        const auto& th = m.trajectory.iterates.back();
        out << "  " << m.name << ": theta = (" << format_double(th[0]) << ", "
            << format_double(th[1]) << ")  J - J* = "
            << format_double(m.final_value - r.f_star) << '\n';
      }
      const auto dir = output_dir(reg_out, s.output.dir);
      print_written(out, export_report(r, dir, "regress"));
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidConfig& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace afgd::cli
