#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "mball/christoffel.hpp"
#include "mball/diagnostics.hpp"
#include "mball/weights.hpp"
#include "oracles.hpp"

using namespace mball;
using std::numbers::pi;

TEST(ChristoffelL2, DegreeZeroIsTotalMass) {
  const OrthoBasis b = orthonormal_basis(0, Weight::jacobi(0.5), 2);
  EXPECT_NEAR(christoffel_l2(b, Point{0.3, 0.3}), pi, 1e-14);
}

TEST(ChristoffelL2, MonomialOracle) {
  for (double mu : {0.0, 0.5, 2.0}) {
    const OrthoBasis b = orthonormal_basis(5, Weight::jacobi(mu), 2);
    for (const Point& x : {Point::origin(2), Point{0.5, 0.1}, Point{0.0, 0.95}}) {
      EXPECT_NEAR(christoffel_l2(b, x) / oracle::christoffel(5, mu, {x[0], x[1]}), 1.0, 1e-9);
    }
  }
}

TEST(ChristoffelL2, VariationalMatches) {
  const Weight w = Weight::product({0.5, 0.5}, 0.5);
  const OrthoBasis b = orthonormal_basis(6, w, 2);
  const QuadratureRule r = weight_rule(w, 12, 2);
  for (const Point& x : random_ball_points(2, 5, 4)) {
    EXPECT_NEAR(christoffel_variational(6, w, x, r) / christoffel_l2(b, x), 1.0, 1e-8);
  }
}

TEST(ChristoffelL2, DecreasesWithDegree) {
  const Point x{0.4, -0.5};
  double prev = 1e300;
  for (int n = 0; n <= 10; ++n) {
    const double v = christoffel_l2(orthonormal_basis(n, Weight::jacobi(1.0), 2), x);
    EXPECT_LE(v, prev * (1 + 1e-12));
    prev = v;
  }
}

TEST(ChristoffelLp, TwoMatchesL2) {
  const Weight w = Weight::jacobi(0.5);
  const OrthoBasis b = orthonormal_basis(4, w, 2);
  for (const Point& x : {Point::origin(2), Point{0.6, 0.3}}) {
    const ChristoffelLpResult r = christoffel_lp(4, 2.0, w, x);
    EXPECT_NEAR(r.value / christoffel_l2(b, x), 1.0, 1e-7);
  }
}

TEST(ChristoffelLp, DegreeZeroIsTotalMass) {
  for (double p : {1.0, 1.5, 3.0}) {
    EXPECT_NEAR(christoffel_lp(0, p, Weight::jacobi(1.0), Point{0.2, 0.1}).value, Weight::jacobi(1.0).total_mass(2),
                1e-12);
  }
}

TEST(ChristoffelLp, ImprovesOnStartAndIsComparable) {
  const Weight w = Weight::jacobi(0.5);
  const ChristoffelLpResult r = christoffel_lp(4, 1.0, w, Point::origin(2));
  EXPECT_LE(r.value, r.start_objective * (1 + 1e-12));
  const double ball = ball_measure(w, Point::origin(2), 0.25);
  EXPECT_GT(r.value / ball, 1e-2);
  EXPECT_LT(r.value / ball, 1e2);
}

TEST(ChristoffelLp, MonotoneInDegree) {
  const Weight w = Weight::jacobi(1.0);
  const Point x{0.3, 0.0};
  double prev = 1e300;
  for (int n = 0; n <= 5; ++n) {
    const double v = christoffel_lp(n, 1.5, w, x).value;
    EXPECT_LE(v, prev * (1 + 1e-6));
    prev = v;
  }
}

TEST(ChristoffelLp, MinimizerBeatsPerturbations) {
  // Objective at the returned value cannot be undercut by feasible competitors
  // built from the p = 2 minimizer mixed with x-vanishing polynomials.
  const Weight w = Weight::jacobi(0.5);
  const Point x{0.2, 0.1};
  const double best = christoffel_lp(3, 1.0, w, x).value;
  const OrthoBasis b = orthonormal_basis(3, w, 2);
  const QuadratureRule rule = weight_rule(w, oversampled_degree(3, 1.0), 2);
  const Eigen::VectorXd ex = b.eval(x);
  const Eigen::VectorXd a2 = ex / ex.squaredNorm();
  const Eigen::MatrixXd V = b.eval_nodes(rule);
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd dirn(b.size());
    for (int j = 0; j < b.size(); ++j) dirn[j] = std::sin(3.0 * k + j);
    dirn -= ex * (ex.dot(dirn) / ex.squaredNorm());
    for (double s : {0.05, 0.2}) {
      const Eigen::VectorXd vals = V * (a2 + s * dirn);
      double obj = 0.0;
      for (size_t q = 0; q < rule.size(); ++q) obj += rule.weights[q] * std::abs(vals[q]);
      EXPECT_GE(obj, best * (1 - 1e-6));
    }
  }
}

TEST(Scan, WindowAndSingleCell) {
  const int ns[] = {4, 8};
  const ChristoffelScan scan = christoffel_scan(Weight::jacobi(0.5), 2.0, ns, 2);
  ASSERT_EQ(scan.rows.size(), 10u);
  EXPECT_LT(scan.window(), 50.0);
  for (const ChristoffelRow& r : scan.rows) {
    EXPECT_GT(r.lambda, 0.0);
    EXPECT_NEAR(r.ratio, r.lambda / r.ball_measure, 1e-15 * r.ratio);
  }
  const Point x{0.5, 0.0};
  const int one[] = {4};
  const Point xs[] = {x};
  const ChristoffelScan single = christoffel_scan(Weight::jacobi(0.5), 2.0, one, 2, xs);
  ASSERT_EQ(single.rows.size(), 1u);
  EXPECT_NEAR(single.rows[0].lambda, christoffel_l2(orthonormal_basis(4, Weight::jacobi(0.5), 2), x), 1e-13);
}

TEST(Scan, ScanPointsAndCsv) {
  const auto pts = default_scan_points(4, 2);
  ASSERT_EQ(pts.size(), 5u);
  EXPECT_NEAR(pts[4].norm(), 1 - 1.0 / 16, 1e-15);
  const int ns[] = {2};
  std::ostringstream os;
  write_christoffel_csv(os, christoffel_scan(Weight::jacobi(0.0), 2.0, ns, 2));
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "n,p,x_norm,lambda,ball_measure,ratio");
}

TEST(Mollified, NormRatioWindow) {
  for (double p : {1.0, 2.0, 4.0}) {
    const MollifiedNormWindow w = mollified_norm_ratio(Weight::jacobi(2.0), 6, p, 2, 5, 3);
    EXPECT_GT(w.min_ratio, 0.0);
    EXPECT_LT(w.max_ratio / w.min_ratio, 10.0);
  }
}
