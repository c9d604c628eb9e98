#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "mball/quadrature.hpp"
#include "oracles.hpp"

using namespace mball;
using std::numbers::pi;

TEST(GaussJacobi, TwoPointLegendre) {
  const QuadratureRule r = gauss_legendre_1d(2);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r.nodes[0], -1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r.nodes[1], 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r.weights[0], 1.0, 1e-15);
  EXPECT_EQ(r.exactness, 3);
}

TEST(GaussJacobi, BetaMoments) {
  // M_k = int (1-t)^a (1+t)^b t^k dt obeys (a+b+k+2) M_{k+1} = (b-a) M_k + k M_{k-1}.
  for (auto [a, b] : {std::pair{0.3, -0.2}, std::pair{2.5, 2.5}, std::pair{-0.5, -0.5}, std::pair{4.0, 0.0}}) {
    const int m = 8;
    const QuadratureRule r = gauss_jacobi_1d(m, a, b);
    std::vector<double> M{std::pow(2.0, a + b + 1) * std::beta(a + 1, b + 1)};
    M.push_back((b - a) * M[0] / (a + b + 2));
    for (int k = 1; k < 2 * m - 1; ++k) M.push_back(((b - a) * M[k] + k * M[k - 1]) / (a + b + k + 2));
    for (int k = 0; k <= 2 * m - 1; ++k) {
      const double expect = M[k];
      double got = 0.0;
      for (size_t q = 0; q < r.size(); ++q) got += r.weights[q] * std::pow(r.nodes[q], k);
      EXPECT_NEAR(got, expect, 1e-11 * std::max(1.0, std::abs(expect))) << a << " " << b << " k=" << k;
    }
  }
}

TEST(GaussJacobi, Errors) {
  EXPECT_THROW(gauss_jacobi_1d(0, 0, 0), std::invalid_argument);
  EXPECT_THROW(gauss_jacobi_1d(4, -1.0, 0), std::invalid_argument);
}

TEST(BallRule, ExactMoments) {
  for (int d : {2, 3}) {
    for (double mu : {0.0, 0.5, 1.0, 2.0}) {
      const int deg = d == 2 ? 12 : 8;
      const QuadratureRule r = ball_rule(deg, mu, d);
      EXPECT_GE(r.exactness, deg);
      for (const auto& a : oracle::monomials(deg, d)) {
        double got = 0.0;
        for (size_t q = 0; q < r.size(); ++q) {
          double v = r.weights[q];
          for (int i = 0; i < d; ++i) v *= std::pow(r.node(q)[i], a[i]);
          got += v;
        }
        ASSERT_NEAR(got, oracle::jacobi_moment(a, mu), 1e-12) << "d=" << d << " mu=" << mu;
      }
    }
  }
}

TEST(WeightRule, ProductMoments) {
  const Weight w = Weight::product({0.5, 0.25}, 0.5);
  const QuadratureRule r = weight_rule(w, 10, 2);
  for (const auto& a : oracle::monomials(10, 2)) {
    double got = 0.0;
    for (size_t q = 0; q < r.size(); ++q) got += r.weights[q] * std::pow(r.node(q)[0], a[0]) * std::pow(r.node(q)[1], a[1]);
    double expect = 0.0;
    if (a[0] % 2 == 0 && a[1] % 2 == 0) {
      const double e1 = a[0] / 2.0 + 0.5, e2 = a[1] / 2.0 + 0.25;
      expect = std::exp(std::lgamma(e1 + 0.5) + std::lgamma(e2 + 0.5) + std::lgamma(1.0) - std::lgamma(e1 + e2 + 2.0));
    }
    ASSERT_NEAR(got, expect, 1e-12) << a[0] << "," << a[1];
  }
}

TEST(WeightRule, RadialStepMoments) {
  const Weight w = Weight::radial_step(0.5, 100);
  const QuadratureRule r = weight_rule(w, 8, 2);
  // int |x|^(2k) over the disk piecewise: 2 pi (a^(2k+2) + c (1 - a^(2k+2))) / (2k+2).
  for (int k = 0; k <= 4; ++k) {
    double got = 0.0;
    for (size_t q = 0; q < r.size(); ++q) {
      const double r2 = r.node(q)[0] * r.node(q)[0] + r.node(q)[1] * r.node(q)[1];
      got += r.weights[q] * std::pow(r2, k);
    }
    const double a = std::pow(0.5, 2 * k + 2);
    EXPECT_NEAR(got, 2 * pi * (a + 100 * (1 - a)) / (2 * k + 2), 1e-10);
  }
}

TEST(SphereRule, Moments) {
  for (int D : {3, 4}) {
    const QuadratureRule r = sphere_rule(8, D);
    EXPECT_NEAR(r.total_weight(), 1.0, 1e-14);
    double m2 = 0.0, m4 = 0.0, m11 = 0.0;
    for (size_t q = 0; q < r.size(); ++q) {
      m2 += r.weights[q] * std::pow(r.node(q)[0], 2);
      m4 += r.weights[q] * std::pow(r.node(q)[D - 1], 4);
      m11 += r.weights[q] * r.node(q)[0] * r.node(q)[1];
    }
    EXPECT_NEAR(m2, 1.0 / D, 1e-14);
    EXPECT_NEAR(m4, 3.0 / (D * (D + 2.0)), 1e-14);
    EXPECT_NEAR(m11, 0.0, 1e-14);
  }
}

TEST(IntervalSplit, KinkedIntegrand) {
  for (double e : {-0.5, 0.0, 1.5}) {
    const double got = integrate_interval_split([](double t) { return std::abs(t); }, e, {0.0}, 20);
    EXPECT_NEAR(got, 1.0 / (e + 1.0), 1e-13);
  }
}

TEST(WeightedNorm, MatchesClosedForm) {
  // ||x_1||_2^2 against w_{1/2} on the disk is pi/4.
  const QuadratureRule r = ball_rule(oversampled_degree(1, 2.0), 0.5, 2);
  const double v = weighted_norm([](const Point& x) { return x[0]; }, Weight::jacobi(0.5), 2.0, r);
  EXPECT_NEAR(v * v, pi / 4, 1e-13);
  EXPECT_THROW(weighted_norm([](const Point& x) { return x[0]; }, Weight::jacobi(1.0), 2.0, r),
               std::invalid_argument);
  const double rw = weighted_norm([](const Point& x) { return x[0]; }, Weight::jacobi(1.5), 2.0,
                                  ball_rule(6, 0.5, 2), true);
  EXPECT_NEAR(rw * rw, oracle::jacobi_moment({2, 0}, 1.5), 1e-13);
}

TEST(RuleCsv, Header) {
  std::ostringstream os;
  write_rule_csv(os, ball_rule(2, 0.5, 2));
  const std::string head = os.str().substr(0, os.str().find('\n'));
  EXPECT_EQ(head, "index,weight,coord_0,coord_1");
}
