#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mball/diagnostics.hpp"
#include "mball/errors.hpp"
#include "mball/kernels.hpp"
#include "mball/polyspace.hpp"
#include "oracles.hpp"

using namespace mball;
using std::numbers::pi;

TEST(Gegenbauer, LowDegreeClosedForms) {
  for (double lam : {0.5, 1.0, 2.5}) {
    for (double t : {-0.9, -0.1, 0.4, 1.0}) {
      EXPECT_DOUBLE_EQ(gegenbauer(0, lam, t), 1.0);
      EXPECT_NEAR(gegenbauer(1, lam, t), 2 * lam * t, 1e-14);
      EXPECT_NEAR(gegenbauer(2, lam, t), 2 * lam * (lam + 1) * t * t - lam, 1e-13);
      EXPECT_NEAR(gegenbauer(3, lam, t), 4.0 / 3.0 * lam * (lam + 1) * (lam + 2) * t * t * t - 2 * lam * (lam + 1) * t,
                  1e-12);
    }
  }
  // lambda = 1/2 gives Legendre: P_4(t) = (35 t^4 - 30 t^2 + 3) / 8.
  EXPECT_NEAR(gegenbauer(4, 0.5, 0.3), (35 * std::pow(0.3, 4) - 30 * 0.09 + 3) / 8, 1e-14);
}

TEST(Cutoff, Shape) {
  EXPECT_DOUBLE_EQ(cutoff_eta(0.0), 1.0);
  EXPECT_DOUBLE_EQ(cutoff_eta(1.0), 1.0);
  EXPECT_DOUBLE_EQ(cutoff_eta(2.0), 0.0);
  EXPECT_DOUBLE_EQ(cutoff_eta(3.0), 0.0);
  EXPECT_NEAR(cutoff_eta(1.5), 0.5, 1e-15);
  for (double t = 1.0; t < 2.0; t += 0.01) EXPECT_GE(cutoff_eta(t), cutoff_eta(t + 0.01));
  const auto c = cutoff_coefficients(4);
  ASSERT_EQ(c.size(), 8u);
  EXPECT_DOUBLE_EQ(c[4], 1.0);
  EXPECT_NEAR(c[6], 0.5, 1e-15);
}

TEST(ReproducingKernel, GegenbauerMatchesBasis) {
  for (int d : {2, 3}) {
    for (double mu : {0.0, 0.5, 1.0, 2.0}) {
      const OrthoBasis b = orthonormal_basis(6, Weight::jacobi(mu), d);
      auto pts = random_ball_points(d, 5, 3);
      pts.push_back(Point::axis(d, 0));
      for (int n = 0; n <= 6; ++n) {
        for (const Point& x : pts) {
          for (const Point& y : pts) {
            const double g = reproducing_kernel(n, mu, x, y).value;
            const double s = reproducing_kernel_basis(b, n, x, y).value;
            ASSERT_NEAR(g, s, 1e-10 * std::max(1.0, std::abs(s))) << "d=" << d << " mu=" << mu << " n=" << n;
          }
        }
      }
    }
  }
}

TEST(ReproducingKernel, DiagonalSumsToBlockDimension) {
  // int P_n(x, x) w(x) dx = dim V_n.
  const double mu = 1.0;
  const QuadratureRule r = ball_rule(12, mu, 2);
  for (int n = 0; n <= 5; ++n) {
    double s = 0.0;
    for (size_t q = 0; q < r.size(); ++q) s += r.weights[q] * reproducing_kernel(n, mu, r.point(q), r.point(q)).value;
    EXPECT_NEAR(s, n + 1.0, 1e-10);
  }
}

TEST(LnKernel, RoutesAgree) {
  for (double mu : {0.0, 0.5, 1.0}) {
    for (int n : {1, 3, 5}) {
      const OrthoBasis b = orthonormal_basis(2 * n - 1, Weight::jacobi(mu), 2);
      for (const Point& x : random_ball_points(2, 4, 5)) {
        for (const Point& y : {Point::origin(2), Point{0.7, -0.5}, Point::axis(2, 1)}) {
          const double g = Ln_kernel(n, mu, x, y).value;
          const double s = Ln_kernel_basis(b, n, x, y).value;
          EXPECT_NEAR(g, s, 1e-7 * std::max(1.0, std::abs(s)));
          for (int axis = 0; axis < 2; ++axis) {
            const double pg = Ln_partial(n, mu, axis, x, y).value;
            const double pb = Ln_partial_basis(b, n, axis, x, y).value;
            EXPECT_NEAR(pg, pb, 1e-7 * std::max(1.0, std::abs(pb)));
          }
        }
      }
    }
  }
}

TEST(LnKernel, PartialAtBoundary) {
  const OrthoBasis b = orthonormal_basis(7, Weight::jacobi(0.5), 2);
  const Point x{std::cos(0.3), std::sin(0.3)};
  const Point y{0.1, 0.2};
  for (int axis = 0; axis < 2; ++axis) {
    EXPECT_NEAR(Ln_partial(4, 0.5, axis, x, y).value, Ln_partial_basis(b, 4, axis, x, y).value, 1e-8);
  }
}

TEST(LnKernel, ReproducesPolynomials) {
  for (double mu : {0.0, 0.5, 1.0}) {
    const ReproducingReport rep = reproducing_residual(4, mu, 2, 5, 21);
    EXPECT_LT(rep.value_residual, 1e-8);
    EXPECT_LT(rep.derivative_residual, 1e-7);
  }
  const ReproducingReport rep3 = reproducing_residual(3, 1.0, 3, 3, 22);
  EXPECT_LT(rep3.value_residual, 1e-8);
  EXPECT_LT(rep3.derivative_residual, 1e-7);
}

TEST(LnKernel, L1NormOfPartialMatchesDirectQuadrature) {
  const double mu = 0.5;
  const int n = 3;
  const Point y{0.2, -0.4};
  // Fine polar midpoint sums in the first argument.
  double direct = 0.0;
  const int nr = 1200, nt = 1200;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) / nr;
    for (int j = 0; j < nt; ++j) {
      const double t = 2 * pi * (j + 0.5) / nt;
      direct += std::abs(Ln_partial(n, mu, 0, Point{r * std::cos(t), r * std::sin(t)}, y).value) * r;
    }
  }
  direct *= (1.0 / nr) * (2 * pi / nt);
  EXPECT_NEAR(Ln_partial_L1(n, mu, 0, y, true) / direct, 1.0, 5e-3);
  EXPECT_NEAR(Ln_partial_L1(n, mu, 0, y, true, 160) / direct, 1.0, 2e-4);
}

TEST(Fejer, NormalizedOnTheSphere) {
  for (int D : {3, 4}) {
    for (auto [n, m] : {std::pair{8, 1}, std::pair{16, 2}, std::pair{32, 3}}) {
      const double integral = oracle::simpson(
          [&](double th) { return fejer_Tn(n, m, th, D) * std::pow(std::sin(th), D - 2); }, 0.0, pi, 20000);
      EXPECT_NEAR(integral, 1.0, 1e-9) << D << " " << n << " " << m;
    }
  }
}

TEST(Lifting, RoundTrip) {
  const BallFn f = [](const Point& x) { return x[0]; };
  const SphereFn g = lift_to_sphere(f, 2);
  const double xb[] = {0.6, 0.0, 0.8};
  const double tx[] = {0.6, 0.0, -0.8};
  EXPECT_DOUBLE_EQ(g(xb), 0.6);
  EXPECT_DOUBLE_EQ(g(tx), 0.6);
  const BallFn back = restrict_to_ball(g, 2);
  EXPECT_DOUBLE_EQ(back(Point{0.3, 0.2}), 0.3);
  const SphereFn odd = [](std::span<const double> y) { return y[2]; };
  EXPECT_THROW(restrict_to_ball(odd, 2), std::invalid_argument);
}

TEST(Needle, PreconditionOnFejerOrder) {
  // m = floor(k/p) + d + 2 = 6 needs n >= 12.
  EXPECT_THROW(needle_polynomial(Point::origin(2), 8, 1.0, 2.0), std::invalid_argument);
}

TEST(Needle, NonnegativeAndCenteredWithSmallOrder) {
  NeedleOptions opt;
  opt.m_override = 1;
  opt.grid_points = 2000;
  const NeedleResult r = needle_polynomial(Point::origin(2), 8, 1.0, 2.0, opt);
  EXPECT_GE(r.min_value, -1e-9);
  EXPECT_GT(r.c_lo, 0.0);
  EXPECT_LE(r.c_lo, r.center_value);
  EXPECT_LE(r.center_value, r.c_hi);
  EXPECT_NEAR(std::pow(r(Point::origin(2)), r.p), r.center_value, 1e-12);
}

TEST(MaximalFunction, Basics) {
  const auto probes = ball_grid(2, 500);
  const BallFn one = [](const Point&) { return 1.0; };
  EXPECT_DOUBLE_EQ(maximal_function(one, 2.0, 4, probes[10], probes), 1.0);
  const BallFn f = [](const Point& x) { return x[0] - 0.3 * x[1]; };
  for (size_t i = 0; i < probes.size(); i += 37) EXPECT_GE(maximal_function(f, 3.0, 8, probes[i], probes), std::abs(f(probes[i])));
  EXPECT_THROW(maximal_function(f, 3.0, 8, probes[0], {}), std::invalid_argument);
}

TEST(Jp, DecreasesInNAndResolves) {
  double prev = 1e300;
  for (int n : {4, 8, 16, 32}) {
    const JpResult r = Jp_integral(n, 0.0, 2.0, 2.0, Point::origin(2));
    EXPECT_LT(r.value, prev);
    EXPECT_LT(r.budget_change, 1e-6);
    prev = r.value;
  }
  EXPECT_THROW(Jp_integral(8, 0.5, 1.0, 1.0, Point::origin(2)), std::invalid_argument);
}

TEST(Jp, RatioBounded) {
  std::vector<double> ratios;
  for (int n : {4, 8, 16, 32}) {
    for (double r : {0.0, 0.9, 1.0 - 1.0 / (n * n)}) {
      ratios.push_back(Jp_integral(n, 1.0, 1.0, 4.0, Point::axis(2, 0, r)).ratio);
    }
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  EXPECT_GT(*lo, 0.0);
  EXPECT_LT(*hi / *lo, 50.0);
}
