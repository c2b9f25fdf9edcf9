#pragma once

// Convergence certificates for the adaptive fractional methods.
//
// Every LMI here is the per-coordinate block of a matrix of the form
// X (x) I_n. Because eig(X (x) I_n) = eig(X) with multiplicity n, checking
// the 2x2 (AFOGD) or 3x3 (AFOAGD) block decides the full n-dimensional LMI.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "afgd/error.hpp"
#include "afgd/smallmat.hpp"

namespace afgd {

/// Scalars entering the certificate LMIs.
struct ProblemParams {
  double m = 0.0;
  double L = 0.0;
  double alpha = 0.0;
  double eta = 0.0;
  double c1 = 1.0;
  double c2 = 1.0;

  void validate() const {
    if (!(m > 0.0) || !(L >= m) || !std::isfinite(L))
      throw InvalidInput("certificate params: need 0 < m <= L");
    if (!(c1 > 0.0) || !(c2 >= c1) || !std::isfinite(c2))
      throw InvalidInput("certificate params: need 0 < c1 <= c2");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
      throw InvalidInput("certificate params: need alpha >= 0");
    if (!(eta >= 0.0) || !std::isfinite(eta))
      throw InvalidInput("certificate params: need eta >= 0");
  }

  friend bool operator==(const ProblemParams&, const ProblemParams&) = default;
};

/// Which sign of grad f(y_k)^T (y_k - x_k) a Lemma-2 bound covers.
enum class PsiCase { Nonneg, Neg };

enum class CaseTag { Theorem1, Theorem2Nonneg, Theorem2Neg };

inline std::string_view to_string(CaseTag c) {
  switch (c) {
    case CaseTag::Theorem1: return "theorem1";
    case CaseTag::Theorem2Nonneg: return "theorem2_nonneg";
    case CaseTag::Theorem2Neg: return "theorem2_neg";
  }
  return "?";
}

inline CaseTag parse_case_tag(std::string_view s) {
  if (s == "theorem1") return CaseTag::Theorem1;
  if (s == "theorem2_nonneg") return CaseTag::Theorem2Nonneg;
  if (s == "theorem2_neg") return CaseTag::Theorem2Neg;
  throw InvalidInput("unknown certificate case '" + std::string(s) + "'");
}

inline PsiCase psi_case(CaseTag c) {
  if (c == CaseTag::Theorem1) throw InvalidInput("theorem1 certificates have no psi case");
  return c == CaseTag::Theorem2Nonneg ? PsiCase::Nonneg : PsiCase::Neg;
}

inline CaseTag case_tag(PsiCase c) {
  return c == PsiCase::Nonneg ? CaseTag::Theorem2Nonneg : CaseTag::Theorem2Neg;
}

/// Psi case of a given inner product grad f(y_k)^T (y_k - x_k).
inline PsiCase classify_psi(double inner) {
  return inner >= 0.0 ? PsiCase::Nonneg : PsiCase::Neg;
}

/// Witness (P, rho^2, h). P is 1x1 (the scalar p0) for Theorem1, 2x2 otherwise.
struct Certificate {
  SymMatrix p;
  double rho_sq = 1.0;
  double h = 0.0;
  CaseTag case_tag = CaseTag::Theorem1;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

/// Per-coordinate state-space blocks; the full system is each block (x) I_n.
struct ReducedSystem {
  Matrix A;  // 2x2
  Matrix B;  // 2x1
  Matrix C;  // 1x2
  Matrix E;  // 1x2
};

/// AFOAGD with state xi_k = [x_{k-1}; x_k] and input u_k = eff * grad f(y_k).
inline ReducedSystem afoagd_system(double alpha, double eta) {
  return {
      Matrix{{0.0, 1.0}, {-eta, 1.0 + eta}},
      Matrix{{0.0}, {-alpha}},
      Matrix{{-eta, 1.0 + eta}},
      Matrix{{0.0, 1.0}},
  };
}

/// Sector block N = [[-mL/(m+L), 1/(2c1)], [1/(2c1), -1/((m+L)c2)]].
inline SymMatrix sector_matrix(const ProblemParams& p) {
  const double s = p.m + p.L;
  const double off = 1.0 / (2.0 * p.c1);
  return SymMatrix{{-p.m * p.L / s, off}, {off, -1.0 / (s * p.c2)}};
}

/// AFOGD LMI with P = p0: [[p0 - rho^2 p0, -alpha p0], [-alpha p0, alpha^2 p0]] + h N.
inline SymMatrix theorem1_lmi(const ProblemParams& p, double rho_sq, double h,
                              double p0 = 1.0) {
  if (!(p0 > 0.0)) throw InvalidInput("theorem1_lmi: p0 must be > 0");
  const SymMatrix lyap{{p0 - rho_sq * p0, -p.alpha * p0},
                       {-p.alpha * p0, p.alpha * p.alpha * p0}};
  return lyap + h * sector_matrix(p);
}

struct Theorem1Rate {
  double alpha_max = 0.0;
  double rho_sq_min = 1.0;
};

/// Closed-form AFOGD certificate with h = 2 alpha c1: the LMI holds iff
/// alpha <= 2c1/((m+L)c2) and rho^2 >= 1 - 2 alpha c1 mL/(m+L).
inline Theorem1Rate theorem1_rate(const ProblemParams& p) {
  p.validate();
  const double s = p.m + p.L;
  Theorem1Rate r;
  r.alpha_max = 2.0 * p.c1 / (s * p.c2);
  if (!(p.alpha > 0.0) || p.alpha > r.alpha_max) {
    throw NoCertificate("alpha = " + std::to_string(p.alpha) +
                        " outside (0, alpha_max = " + std::to_string(r.alpha_max) + "]");
  }
  r.rho_sq_min = std::max(0.0, 1.0 - 2.0 * p.alpha * p.c1 * p.m * p.L / s);
  return r;
}

inline Certificate theorem1_certificate(const ProblemParams& p) {
  const auto r = theorem1_rate(p);
  return {SymMatrix{{1.0}}, r.rho_sq_min, 2.0 * p.alpha * p.c1, CaseTag::Theorem1};
}

/// Reduced N^1 (bound on f(x_{k+1}) - f(x*)).
inline SymMatrix lemma1_matrix(const ProblemParams& p) {
  const double e = p.eta, m = p.m;
  const double corner = 0.5 * p.alpha * p.alpha * p.L - p.alpha / p.c2;
  return SymMatrix{
      {-e * e * m / 2.0, e * (e + 1.0) * m / 2.0, -e / (2.0 * p.c1)},
      {e * (e + 1.0) * m / 2.0, -(e + 1.0) * (e + 1.0) * m / 2.0, (e + 1.0) / (2.0 * p.c1)},
      {-e / (2.0 * p.c1), (e + 1.0) / (2.0 * p.c1), corner},
  };
}

/// Reduced N^2 (bound on f(x_{k+1}) - f(x_k)) for one psi case. The
/// couplings use 1/(2c1) when the inner product is >= 0 and 1/(2c2) otherwise.
inline SymMatrix lemma2_matrix(const ProblemParams& p, PsiCase which) {
  const double e = p.eta, m = p.m;
  const double c = which == PsiCase::Nonneg ? p.c1 : p.c2;
  const double corner = 0.5 * p.alpha * p.alpha * p.L - p.alpha / p.c2;
  const double d = e * e * m / 2.0;
  const double k = e / (2.0 * c);
  return SymMatrix{{-d, d, -k}, {d, -d, k}, {-k, k, corner}};
}

/// Reduced N^3 = T^T N T with T = [[C, 0], [0, 1]].
inline SymMatrix n3_matrix(const ProblemParams& p) {
  const auto sys = afoagd_system(p.alpha, p.eta);
  const Matrix t{{sys.C(0, 0), sys.C(0, 1), 0.0}, {0.0, 0.0, 1.0}};
  return congruence(t, sector_matrix(p));
}

/// M = [[A^T P A - rho^2 P, A^T P B], [B^T P A, B^T P B]] for the AFOAGD system.
inline SymMatrix lyapunov_block(const ProblemParams& p, const SymMatrix& P, double rho_sq) {
  if (P.dim() != 2) throw InvalidInput("lyapunov_block: P must be 2x2");
  const auto sys = afoagd_system(p.alpha, p.eta);
  const Matrix ab{{sys.A(0, 0), sys.A(0, 1), sys.B(0, 0)},
                  {sys.A(1, 0), sys.A(1, 1), sys.B(1, 0)}};
  const Matrix shift{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  return congruence(ab, P) + (-rho_sq) * congruence(shift, P);
}

/// M + (1 - rho^2) N^1 + rho^2 N^2 + h N^3.
inline SymMatrix theorem2_lmi(const ProblemParams& p, const SymMatrix& P, double rho_sq,
                              double h, PsiCase which) {
  return lyapunov_block(p, P, rho_sq) + (1.0 - rho_sq) * lemma1_matrix(p) +
         rho_sq * lemma2_matrix(p, which) + h * n3_matrix(p);
}

/// Outcome of checking one certificate.
struct CertificateReport {
  bool rho_in_range = false;
  bool h_nonnegative = false;
  bool p_positive_definite = false;
  double p_min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  double lmi_max_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  bool lmi_holds = false;

  bool valid() const {
    return rho_in_range && h_nonnegative && p_positive_definite && lmi_holds;
  }
};

/// The LMI that a certificate's case tag refers to.
inline SymMatrix certificate_lmi(const ProblemParams& p, const Certificate& c) {
  if (c.case_tag == CaseTag::Theorem1) {
    if (c.p.dim() != 1) throw InvalidInput("theorem1 certificate needs a 1x1 P");
    return theorem1_lmi(p, c.rho_sq, c.h, c.p(0, 0));
  }
  if (c.p.dim() != 2) throw InvalidInput("theorem2 certificate needs a 2x2 P");
  return theorem2_lmi(p, c.p, c.rho_sq, c.h, psi_case(c.case_tag));
}

/// rho^2 outside (0, 1) or negative h are rejected before any LMI evaluation.
inline CertificateReport evaluate_certificate(const ProblemParams& p, const Certificate& c,
                                              double tol = kNsdTolerance) {
  CertificateReport r;
  r.rho_in_range = c.rho_sq > 0.0 && c.rho_sq < 1.0;
  r.h_nonnegative = c.h >= 0.0;
  if (!r.rho_in_range || !r.h_nonnegative) return r;
  r.p_min_eigenvalue = min_eigenvalue(c.p);
  r.p_positive_definite = r.p_min_eigenvalue > 0.0;
  r.lmi_max_eigenvalue = max_eigenvalue(certificate_lmi(p, c));
  r.lmi_holds = r.lmi_max_eigenvalue <= tol;
  return r;
}

inline bool check_certificate(const ProblemParams& p, const Certificate& c,
                              double tol = kNsdTolerance) {
  return evaluate_certificate(p, c, tol).valid();
}

/// AFOAGD certificate: one witness per psi case.
struct Theorem2Certificate {
  Certificate nonneg;
  Certificate neg;

  const Certificate& for_case(PsiCase c) const { return c == PsiCase::Nonneg ? nonneg : neg; }
};

struct Theorem2Verdict {
  CertificateReport nonneg;
  CertificateReport neg;
  bool valid = false;
  /// sqrt of the larger rho^2 of the two cases (only meaningful when valid).
  double certified_rho = std::numeric_limits<double>::quiet_NaN();
};

/// Both cases must pass; the certified rate is the worse (larger) of the two.
inline Theorem2Verdict check_certificate(const ProblemParams& p, const Theorem2Certificate& c,
                                         double tol = kNsdTolerance) {
  if (c.nonneg.case_tag != CaseTag::Theorem2Nonneg || c.neg.case_tag != CaseTag::Theorem2Neg)
    throw InvalidInput("theorem2 certificate pair has mismatched case tags");
  Theorem2Verdict v;
  v.nonneg = evaluate_certificate(p, c.nonneg, tol);
  v.neg = evaluate_certificate(p, c.neg, tol);
  v.valid = v.nonneg.valid() && v.neg.valid();
  v.certified_rho = std::sqrt(std::max(c.nonneg.rho_sq, c.neg.rho_sq));
  return v;
}

/// V(xi) = p0 |x_k - x*|^2, the Lyapunov function behind a Theorem1 certificate.
inline double theorem1_lyapunov(double p0, const Vector& x, const Vector& x_star) {
  const Vector d = x - x_star;
  return p0 * dot(d, d);
}

/// V(xi_k) = sum over coordinates of d_i^T P d_i plus the optimality gap, where
/// d_i = [x_{k-1,i} - x*_i, x_{k,i} - x*_i].
inline double theorem2_lyapunov(const SymMatrix& P, const Vector& x_prev, const Vector& x_cur,
                                const Vector& x_star, double value_gap) {
  if (P.dim() != 2) throw InvalidInput("theorem2_lyapunov: P must be 2x2");
  double v = value_gap;
  for (std::size_t i = 0; i < x_star.size(); ++i) {
    const double a = x_prev[i] - x_star[i];
    const double b = x_cur[i] - x_star[i];
    v += P(0, 0) * a * a + 2.0 * P(0, 1) * a * b + P(1, 1) * b * b;
  }
  return v;
}

/// Grids for the certificate search.
struct SearchGrids {
  double rho_sq_lo = 0.0;
  double rho_sq_hi = 1.0;
  double rho_sq_width = 1e-3;       // bisection stops at this bracket width
  std::vector<double> h_values;     // coarse h grid
  std::vector<double> p_values;     // coarse grid for each of p11, p12, p22
  double refine_radius = 0.5;       // local pass on P entries around the best point
  double refine_step = 0.05;
  double h_refine_radius = 0.05;
  double h_refine_step = 0.005;
  double tol = kNsdTolerance;
};

inline std::vector<double> linspace_step(double lo, double hi, double step) {
  std::vector<double> v;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) v.push_back(lo + static_cast<double>(i) * step);
  return v;
}

/// h in {0, 0.05, ..., 2}; P entries in {-8, -7.5, ..., 8}.
inline SearchGrids default_search_grids() {
  SearchGrids g;
  g.h_values = linspace_step(0.0, 2.0, 0.05);
  g.p_values = linspace_step(-8.0, 8.0, 0.5);
  return g;
}

namespace detail {

struct SearchPoint {
  double h = 0.0, p11 = 0.0, p12 = 0.0, p22 = 0.0;
  double score = std::numeric_limits<double>::infinity();  // max LMI eigenvalue
};

/// Scans a (h, P) product grid for the smallest worst-case LMI eigenvalue.
/// Ties keep the first point in lexicographic (h, p11, p12, p22) order.
template <typename Score>
void scan_grid(const std::vector<double>& hs, const std::vector<double>& p11s,
               const std::vector<double>& p12s, const std::vector<double>& p22s,
               const Score& score, SearchPoint& best) {
  for (double h : hs) {
    if (h < 0.0) continue;
    for (double a : p11s) {
      if (!(a > 0.0)) continue;
      for (double b : p12s)
        for (double d : p22s) {
          if (!(d > 0.0) || !(a * d - b * b > 0.0)) continue;
          const double s = score(h, SymMatrix::sym2(a, b, d));
          if (s < best.score) best = {h, a, b, d, s};
        }
    }
  }
}

inline std::vector<double> around(double center, double radius, double step) {
  std::vector<double> v;
  const auto n = static_cast<long>(std::round(radius / step));
  for (long i = -n; i <= n; ++i) v.push_back(center + static_cast<double>(i) * step);
  return v;
}

/// Coarse scan plus one local refinement at fixed rho^2.
template <typename Score>
SearchPoint best_point(const SearchGrids& g, const Score& score) {
  SearchPoint best;
  scan_grid(g.h_values, g.p_values, g.p_values, g.p_values, score, best);
  if (best.score > g.tol && std::isfinite(best.score)) {
    SearchPoint refined = best;
    scan_grid(around(best.h, g.h_refine_radius, g.h_refine_step),
              around(best.p11, g.refine_radius, g.refine_step),
              around(best.p12, g.refine_radius, g.refine_step),
              around(best.p22, g.refine_radius, g.refine_step), score, refined);
    best = refined;
  }
  return best;
}

/// Bisection on rho^2 with `feasible_at(rho_sq)` returning the witness point.
template <typename AtRho>
std::optional<std::pair<double, SearchPoint>> bisect_rho(const SearchGrids& g,
                                                         const AtRho& at_rho) {
  if (g.h_values.empty() || g.p_values.empty())
    throw InvalidInput("search_certificate: grids must be non-empty");
  if (!(g.rho_sq_lo >= 0.0 && g.rho_sq_hi <= 1.0 && g.rho_sq_lo < g.rho_sq_hi))
    throw InvalidInput("search_certificate: need 0 <= rho_sq_lo < rho_sq_hi <= 1");

  // rho^2 must stay strictly below 1.
  const double top = std::min(g.rho_sq_hi, 1.0 - 1e-6);
  auto witness = at_rho(top);
  if (witness.score > g.tol) return std::nullopt;
  std::pair<double, SearchPoint> best{top, witness};

  double lo = g.rho_sq_lo, hi = top;
  while (hi - lo > g.rho_sq_width) {
    const double mid = 0.5 * (lo + hi);
    auto w = at_rho(mid);
    if (w.score <= g.tol) {
      hi = mid;
      best = {mid, w};
    } else {
      lo = mid;
    }
  }
  return best;
}

}  // namespace detail

/// The Theorem-2 LMI at fixed rho^2 as an affine function of (P, h):
///   base + p11 E11 + p12 E12 + p22 E22 + h N^3.
struct Theorem2Pencil {
  SymMatrix base;
  SymMatrix e11, e12, e22;
  SymMatrix n3;

  Theorem2Pencil(const ProblemParams& p, double rho_sq, PsiCase which)
      : base((1.0 - rho_sq) * lemma1_matrix(p) + rho_sq * lemma2_matrix(p, which)),
        e11(lyapunov_block(p, SymMatrix{{1.0, 0.0}, {0.0, 0.0}}, rho_sq)),
        e12(lyapunov_block(p, SymMatrix{{0.0, 1.0}, {1.0, 0.0}}, rho_sq)),
        e22(lyapunov_block(p, SymMatrix{{0.0, 0.0}, {0.0, 1.0}}, rho_sq)),
        n3(n3_matrix(p)) {}

  SymMatrix at(double h, const SymMatrix& P) const {
    return base + P(0, 0) * e11 + P(0, 1) * e12 + P(1, 1) * e22 + h * n3;
  }
};

/// Smallest-rho^2 Theorem-2 certificate for one psi case on the given grids.
///
/// Bisects rho^2; for each candidate scans (h, P) over the coarse grid with a
/// positive-definiteness filter, then refines once around the point with the
/// smallest LMI eigenvalue. The witness returned is that minimizing point.
inline std::optional<Certificate> search_certificate(const ProblemParams& p,
                                                     const SearchGrids& g, PsiCase which) {
  p.validate();
  auto at_rho = [&](double rho_sq) {
    const Theorem2Pencil pencil(p, rho_sq, which);
    return detail::best_point(g, [&](double h, const SymMatrix& P) {
      return max_eigenvalue(pencil.at(h, P));
    });
  };
  const auto r = detail::bisect_rho(g, at_rho);
  if (!r) return std::nullopt;
  const auto& w = r->second;
  return Certificate{SymMatrix{{w.p11, w.p12}, {w.p12, w.p22}}, r->first, w.h,
                     case_tag(which)};
}

/// Per-case search for both psi cases; none unless both are feasible.
inline std::optional<Theorem2Certificate> search_theorem2(const ProblemParams& p,
                                                          const SearchGrids& g) {
  auto nonneg = search_certificate(p, g, PsiCase::Nonneg);
  if (!nonneg) return std::nullopt;
  auto neg = search_certificate(p, g, PsiCase::Neg);
  if (!neg) return std::nullopt;
  return Theorem2Certificate{*nonneg, *neg};
}

/// One (P, rho^2, h) that satisfies the LMI in both psi cases at once.
inline std::optional<Theorem2Certificate> search_common_certificate(const ProblemParams& p,
                                                                    const SearchGrids& g) {
  p.validate();
  auto at_rho = [&](double rho_sq) {
    const Theorem2Pencil nonneg(p, rho_sq, PsiCase::Nonneg);
    const Theorem2Pencil neg(p, rho_sq, PsiCase::Neg);
    return detail::best_point(g, [&](double h, const SymMatrix& P) {
      return std::max(max_eigenvalue(nonneg.at(h, P)), max_eigenvalue(neg.at(h, P)));
    });
  };
  const auto r = detail::bisect_rho(g, at_rho);
  if (!r) return std::nullopt;
  const auto& w = r->second;
  const SymMatrix P{{w.p11, w.p12}, {w.p12, w.p22}};
  return Theorem2Certificate{{P, r->first, w.h, CaseTag::Theorem2Nonneg},
                             {P, r->first, w.h, CaseTag::Theorem2Neg}};
}

}  // namespace afgd
