#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "afgd/harness.hpp"
#include "afgd/objectives.hpp"

using namespace afgd;

namespace {

QuadraticObjective sim1() {
  return QuadraticObjective(SymMatrix::diagonal({2.0, 3.0}), Vector{0.0, 0.0}, 3.0);
}

QuadraticObjective sim2() {
  return QuadraticObjective(SymMatrix::diagonal({8.0, 2.0}), Vector{4.0, 2.0}, -1.0);
}

// Q = R diag(e1, e2) R^T / 2 so the Hessian 2Q has eigenvalues e1, e2.
QuadraticObjective random_pd_quadratic(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> eig(lo, hi), angle(0.0, 6.283185307179586),
      coef(-5.0, 5.0);
  const double e1 = eig(rng), e2 = eig(rng), t = angle(rng);
  const double c = std::cos(t), s = std::sin(t);
  const Matrix r{{c, -s}, {s, c}};
  const Matrix d{{e1 / 2.0, 0.0}, {0.0, e2 / 2.0}};
  return QuadraticObjective(SymMatrix(r * d * r.transposed()), Vector{coef(rng), coef(rng)},
                            coef(rng));
}

Vector random_point(std::mt19937_64& rng, double scale = 10.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vector{u(rng), u(rng)};
}

double rel_err(const Vector& a, const Vector& b) {
  return norm(a - b) / std::max(1.0, norm(b));
}

}  // namespace

TEST(QuadraticValue, SpecExamples) {
  EXPECT_DOUBLE_EQ(sim1().value(Vector{0.0, 0.0}), 3.0);
  EXPECT_DOUBLE_EQ(sim2().value(Vector{-0.25, -0.5}), -2.0);
  EXPECT_DOUBLE_EQ(sim2().value(Vector{0.0, 0.0}), -1.0);
}

TEST(QuadraticValue, DimensionMismatchThrows) {
  EXPECT_THROW(sim1().value(Vector{1.0}), InvalidInput);
  EXPECT_THROW(sim1().gradient(Vector{1.0, 2.0, 3.0}), InvalidInput);
}

TEST(QuadraticGradient, SpecExamples) {
  EXPECT_EQ(sim1().gradient(Vector{1.0, 1.0}), (Vector{4.0, 6.0}));
  const auto f = sim2();
  EXPECT_EQ(f.gradient(minimizer(f)), (Vector{0.0, 0.0}));
}

TEST(RegressionGradient, ZeroAtPerfectFit) {
  const RegressionObjective f({{0.0, 0.5}, {1.0, 2.5}, {2.0, 4.5}});
  EXPECT_EQ(f.gradient(Vector{0.5, 2.0}), (Vector{0.0, 0.0}));
  EXPECT_DOUBLE_EQ(f.value(Vector{0.5, 2.0}), 0.0);
}

TEST(RegressionObjective, NormalizationAndValidation) {
  const RegressionObjective f({{0.0, 1.0}, {1.0, 1.0}});
  // residuals (-1, -1) at theta = 0: (1 + 1) / (2 * 2)
  EXPECT_DOUBLE_EQ(f.value(Vector{0.0, 0.0}), 0.5);
  EXPECT_THROW(RegressionObjective({{1.0, 1.0}}), InvalidInput);
  const RegressionObjective same_x({{1.0, 1.0}, {1.0, 2.0}});
  EXPECT_THROW(same_x.normal_equation_solution(), DegenerateObjective);
}

TEST(Minimizer, SpecExamples) {
  EXPECT_EQ(minimizer(sim1()), (Vector{0.0, 0.0}));
  const Vector x2 = minimizer(sim2());
  EXPECT_DOUBLE_EQ(x2[0], -0.25);
  EXPECT_DOUBLE_EQ(x2[1], -0.5);
  const QuadraticObjective id(SymMatrix::identity(3), Vector(3), 0.0);
  EXPECT_EQ(minimizer(id), Vector(3));
}

TEST(Minimizer, SingularHessianThrows) {
  const QuadraticObjective f(SymMatrix::diagonal({1.0, 0.0}), Vector{1.0, 1.0}, 0.0);
  EXPECT_THROW(minimizer(f), DegenerateObjective);
}

TEST(Bounds, SpecExamples) {
  EXPECT_EQ(bounds(sim1()), (SmoothnessBounds{4.0, 6.0}));
  EXPECT_EQ(bounds(sim2()), (SmoothnessBounds{4.0, 16.0}));
  const QuadraticObjective id(SymMatrix::identity(2), Vector(2), 0.0);
  EXPECT_EQ(bounds(id), (SmoothnessBounds{2.0, 2.0}));
}

TEST(Bounds, OverrideSlotCarriesStatedValues) {
  const auto f = sim2().with_bounds_override({2.0, 8.0});
  EXPECT_EQ(bounds(f), (SmoothnessBounds{2.0, 8.0}));
  EXPECT_EQ(f.value(Vector{1.0, 1.0}), sim2().value(Vector{1.0, 1.0}));
}

TEST(FiniteDiff, SpecExamples) {
  const Vector g = finite_diff_gradient(sim1(), Vector{1.0, 1.0}, 1e-5);
  EXPECT_NEAR(g[0], 4.0, 1e-6);
  EXPECT_NEAR(g[1], 6.0, 1e-6);
  const QuadraticObjective constant(SymMatrix(2), Vector(2), 7.0);
  EXPECT_EQ(finite_diff_gradient(constant, Vector{3.0, -2.0}), Vector(2));
  EXPECT_THROW(finite_diff_gradient(constant, Vector(2), 0.0), InvalidInput);
}

TEST(GradientProperty, QuadraticMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto f = random_pd_quadratic(rng, 1.0, 20.0);
    const Vector x = random_point(rng);
    EXPECT_LT(rel_err(finite_diff_gradient(f, x), f.gradient(x)), 1e-6);
  }
}

TEST(GradientProperty, RegressionMatchesFiniteDifferences) {
  const auto f = generate_regression_dataset(42, 40, {0.46, 2.0}, 0.3);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Vector th = random_point(rng, 5.0);
    EXPECT_LT(rel_err(finite_diff_gradient(f, th), f.gradient(th)), 1e-6);
  }
}

TEST(MinimizerProperty, GlobalOptimality) {
  std::mt19937_64 rng(3);
  const auto f = random_pd_quadratic(rng, 0.5, 10.0);
  const double best = f.value(minimizer(f));
  for (int i = 0; i < 1000; ++i) EXPECT_LE(best, f.value(random_point(rng)) + 1e-12);
}

TEST(Cocoercivity, SpecExamples) {
  const auto f = sim1();
  EXPECT_TRUE(cocoercivity_holds(f, Vector{1.0, 2.0}, Vector{1.0, 2.0}, 0.0));
  EXPECT_TRUE(cocoercivity_holds(f, Vector{1.0, 0.0}, Vector{0.0, 1.0}, 1e-12));
  // hand evaluation with m = 4, L = 6: dx = (-1, 1), dg = (-4, 6)
  // 2.4 * 2 + 52 / 10 = 10 <= 10, tight because both directions are eigenvectors
  EXPECT_NEAR(cocoercivity_slack({4.0, 6.0}, Vector{1.0, 0.0}, Vector{0.0, 1.0},
                                 f.gradient(Vector{1.0, 0.0}), f.gradient(Vector{0.0, 1.0})),
              0.0, 1e-12);
}

TEST(CocoercivityProperty, RandomPairsOnRandomQuadratics) {
  std::mt19937_64 rng(4);
  for (int q = 0; q < 20; ++q) {
    const auto f = random_pd_quadratic(rng, 1.0, 20.0);
    const auto b = bounds(f);
    for (int i = 0; i < 50; ++i) {
      const Vector x = random_point(rng), y = random_point(rng);
      EXPECT_TRUE(cocoercivity_holds(f, x, y, 1e-9));
      // the quadratic-constraint form agrees: z^T Q_f z >= -tol
      EXPECT_GE(quadratic_constraint_value(b, x, y, f.gradient(x), f.gradient(y)), -1e-9);
      EXPECT_NEAR(quadratic_constraint_value(b, x, y, f.gradient(x), f.gradient(y)),
                  cocoercivity_slack(b, x, y, f.gradient(x), f.gradient(y)), 1e-8);
    }
  }
}

TEST(Cocoercivity, WrongBoundsDetected) {
  // claiming L = 1 for a function with curvature 6 must fail somewhere
  const auto f = sim1();
  EXPECT_FALSE(cocoercivity_holds(f, {0.5, 1.0}, Vector{0.0, 0.0}, Vector{0.0, 1.0}, 1e-9));
}

TEST(LoadRegressionCsv, ParsesAndReportsLine) {
  const auto dir = std::filesystem::temp_directory_path() / "afgd_csv_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "good.csv") << "x,y\n0,1\n1,3\n2,5\n";
    std::ofstream(dir / "bad.csv") << "x,y\n0,1\n1,abc\n";
    std::ofstream(dir / "nohdr.csv") << "0,1\n";
  }
  const auto f = load_regression_csv((dir / "good.csv").string());
  EXPECT_EQ(f.count(), 3u);
  const Vector th = f.normal_equation_solution();
  EXPECT_NEAR(th[0], 1.0, 1e-12);
  EXPECT_NEAR(th[1], 2.0, 1e-12);
  try {
    load_regression_csv((dir / "bad.csv").string());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(load_regression_csv((dir / "nohdr.csv").string()), ParseError);
  EXPECT_THROW(load_regression_csv((dir / "missing.csv").string()), IoError);
}
