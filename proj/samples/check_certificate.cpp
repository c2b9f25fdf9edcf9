// Closed-form AFOGD certificate, then a grid search for AFOAGD.
#include <cmath>
#include <cstdio>

#include "afgd/certificates.hpp"

int main() {
  using namespace afgd;
  ProblemParams p{2.0, 8.0, 0.1, 0.2, 0.5, 1.0};

  const Theorem1Rate t1 = theorem1_rate(p);
  std::printf("AFOGD: alpha_max = %g, rho^2 = %g, certificate %s\n", t1.alpha_max,
              t1.rho_sq_min, check_certificate(p, theorem1_certificate(p)) ? "holds" : "fails");

  if (const auto c = search_theorem2(p, default_search_grids())) {
    const Theorem2Verdict v = check_certificate(p, *c);
    std::printf("AFOAGD: rho^2 = %g (nonneg), %g (neg); certified rho = %.4f\n",
                c->nonneg.rho_sq, c->neg.rho_sq, v.certified_rho);
  } else {
    std::printf("AFOAGD: no certificate on the default grid\n");
  }
}
