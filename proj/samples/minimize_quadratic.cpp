// Minimize 2 x1^2 + 3 x2^2 + 3 with AFOGD and print the fitted rate.
#include <cstdio>

#include "afgd/harness.hpp"
#include "afgd/optimizers.hpp"

int main() {
  using namespace afgd;
  const QuadraticObjective f(SymMatrix::diagonal({2.0, 3.0}), Vector{0.0, 0.0}, 3.0);

  OptimizerConfig cfg;
  cfg.method = Method::AFOGD;
  cfg.alpha = 0.2;
  cfg.mu = 1.7;
  cfg.c1 = 0.8;
  cfg.c2 = 1.3;

  const Trajectory t = run(f, cfg, Vector{0.1, 0.1}, Vector{1.0, 1.0});
  const Vector& x = t.iterates.back();
  std::printf("%s after %zu steps: x = (%.3g, %.3g), f = %.12g\n",
              std::string(to_string(t.stop_reason)).c_str(), t.steps(), x[0], x[1],
              t.values.back());

  const RateEstimate r = empirical_rate(t, minimizer(f));
  std::printf("fitted rate %.4f over iterates %zu..%zu\n", r.rho_emp, r.fit_first, r.fit_last);
}
