#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "mball/errors.hpp"
#include "mball/markov.hpp"
#include "oracles.hpp"

using namespace mball;
using std::numbers::pi;

TEST(WorstL2, DegreeZeroAndOne) {
  EXPECT_DOUBLE_EQ(worst_l2(markov_setup(0, Weight::jacobi(0.5), 2)).value, 0.0);
  // Brute force over P = a0 + a1 x + a2 y with w = 1: ratio^2 = pi(a1^2+a2^2) / (pi a0^2 + pi(a1^2+a2^2)/4).
  double best = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double a0 = i / 200.0 - 0.5;
    for (int j = 0; j <= 200; ++j) {
      const double a1 = j / 100.0 - 1.0;
      const double num = pi * a1 * a1;
      const double den = pi * a0 * a0 + pi * a1 * a1 / 4;
      if (den > 0) best = std::max(best, std::sqrt(num / den));
    }
  }
  EXPECT_NEAR(best, 2.0, 1e-12);
  const WorstCaseResult r = worst_l2(markov_setup(1, Weight::jacobi(0.5), 2));
  EXPECT_NEAR(r.value, best, 1e-10);
  EXPECT_EQ(r.method, WorstMethod::eigen_exact);
}

TEST(WorstL2, MonomialGeneralizedEigenOracle) {
  for (double mu : {0.0, 0.5, 1.0}) {
    for (int n : {2, 4, 6}) {
      EXPECT_NEAR(worst_l2(markov_setup(n, Weight::jacobi(mu), 2)).value / oracle::worst_l2(n, 2, mu), 1.0, 1e-8)
          << "mu " << mu << " n " << n;
    }
  }
  EXPECT_NEAR(worst_l2(markov_setup(3, Weight::jacobi(1.0), 3)).value / oracle::worst_l2(3, 3, 1.0), 1.0, 1e-8);
}

TEST(WorstL2, MonotoneAndEigenvalueIdentity) {
  const Weight w = Weight::jacobi(0.5);
  double prev = 0.0;
  for (int n = 0; n <= 12; ++n) {
    const MarkovSetup s = markov_setup(n, w, 2);
    const WorstCaseResult r = worst_l2(s);
    EXPECT_GE(r.value, prev * (1 - 1e-12));
    prev = r.value;
    if (n == 0) continue;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(s.basis_n.size(), s.basis_n.size());
    for (const DiffMatrix& d : s.diff) M += d.matrix.transpose() * d.matrix;
    const double rq = r.extremal.dot(M * r.extremal) / r.extremal.squaredNorm();
    EXPECT_NEAR(rq / (r.value * r.value), 1.0, 1e-9);
  }
}

TEST(WorstL2, BasisRotationInvariant) {
  const Weight w = Weight::jacobi(1.0);
  const QuadratureRule rule = weight_rule(w, 12, 2);
  MarkovSetup a = markov_setup(6, w, 2);
  MarkovSetup b;
  b.basis_n = orthonormal_basis(6, w, rule, 99);
  b.basis_n_minus_1 = b.basis_n.truncated(5);
  for (int i = 0; i < 2; ++i) b.diff.push_back(differentiation_matrix(b.basis_n, b.basis_n_minus_1, i));
  EXPECT_NEAR(worst_l2(a).value, worst_l2(b).value, 1e-7 * worst_l2(a).value);
  EXPECT_NEAR(trace_formula(a).value, trace_formula(b).value, 1e-7 * trace_formula(a).value);
}

TEST(WorstLp, TwoMatchesEigen) {
  const Weight w = Weight::jacobi(0.5);
  for (int n : {2, 4}) {
    const double exact = worst_l2(markov_setup(n, w, 2)).value;
    const WorstCaseResult r = worst_lp(n, 2.0, w, 2);
    EXPECT_NEAR(r.value / exact, 1.0, 1e-4);
  }
}

TEST(WorstLp, AtLeastLiftedAndMonotoneInRestarts) {
  for (double p : {1.0, 4.0}) {
    const WorstCaseResult few = worst_lp(4, p, Weight::jacobi(0.5), 2, {2, 7, 300});
    const WorstCaseResult many = worst_lp(4, p, Weight::jacobi(0.5), 2, {4, 7, 300});
    EXPECT_GE(many.value, few.value * (1 - 1e-12));
    const LiftedResult lifted = lifted_lower_bound(4, p, 0.5, 2);
    EXPECT_GE(many.value, lifted.value - 1e-6);
  }
}

TEST(Worst1D, BruteForceDegreeOne) {
  // f = a + b t against w = 1: ||f'||^2 = 2 b^2, ||f||^2 = 2 a^2 + 2 b^2 / 3.
  double best = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double a = i / 400.0 - 0.5;
    const double b = 1.0;
    best = std::max(best, std::sqrt(2 * b * b / (2 * a * a + 2 * b * b / 3)));
  }
  EXPECT_NEAR(worst_1d(1, 2.0, 0.5), best, 1e-12);
  EXPECT_DOUBLE_EQ(worst_1d(0, 2.0, 0.5), 0.0);
}

TEST(Worst1D, LegendreMarkovGrowth) {
  // Exact p = 2 values grow like n^2.
  std::vector<std::pair<double, double>> pts;
  for (int n : {16, 32, 64}) pts.emplace_back(n, worst_1d(n, 2.0, 0.5));
  const ExponentFit f = exponent_fit(pts);
  EXPECT_GT(f.slope, 1.5);
  EXPECT_LT(f.slope, 2.1);
}

TEST(Jacobi1D, Orthonormal) {
  for (double lam : {0.5, 1.0, 3.0}) {
    const Jacobi1D J = jacobi_1d(6, lam);
    const QuadratureRule r = gauss_jacobi_1d(12, lam - 0.5, lam - 0.5);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(7, 7);
    for (size_t q = 0; q < r.size(); ++q) {
      const Eigen::VectorXd v = J.eval(r.nodes[q]).col(0);
      G += r.weights[q] * v * v.transpose();
    }
    EXPECT_LT((G - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Lifted, IdentityIsFunctionIndependent) {
  for (double p : {1.0, 2.0, 4.0}) {
    const LiftedResult r = lifted_lower_bound(6, p, 0.5, 2);
    EXPECT_LT(r.identity_spread, 1e-7);
    EXPECT_GT(r.identity_constant, 0.0);
    EXPECT_NEAR(r.value, worst_1d(6, p, 1.0), 1e-12 * r.value);
  }
  // d = 2, mu = 1/2: int_B f(x_1)^2 dx = int f(t)^2 2 sqrt(1-t^2) dt, so c = 2.
  EXPECT_NEAR(lifted_lower_bound(3, 2.0, 0.5, 2).identity_constant, 2.0, 1e-10);
}

TEST(Lifted, BelowWorstL2) {
  for (double mu : {0.0, 0.5, 1.0}) {
    for (int n : {2, 5, 8}) {
      EXPECT_LE(lifted_lower_bound(n, 2.0, mu, 2).value, worst_l2(markov_setup(n, Weight::jacobi(mu), 2)).value * (1 + 1e-10));
    }
  }
}

TEST(Trace, HandValueAndIdentity) {
  const TraceResult t1 = trace_formula(markov_setup(1, Weight::jacobi(0.5), 2));
  EXPECT_NEAR(t1.matrix_trace[0], 4.0, 1e-10);
  EXPECT_NEAR(t1.matrix_trace[1], 4.0, 1e-10);
  EXPECT_NEAR(t1.value, 4.0, 1e-10);
  for (double mu : {0.0, 0.5, 1.0}) {
    for (int n : {3, 8, 12}) {
      const TraceResult t = trace_formula(markov_setup(n, Weight::jacobi(mu), 2));
      EXPECT_LT(t.max_relative_gap, 1e-8);
    }
  }
}

TEST(Average, DegreeOneClosedForm) {
  // 2 |(a1, a2)| / |a| for a uniform direction in R^3 has mean 2 * pi / 4.
  const AverageCaseResult r = average_monte_carlo(markov_setup(1, Weight::jacobi(0.5), 2), 1.0, 20000, 5);
  EXPECT_LT(std::abs(r.monte_carlo_mean - pi / 2), 3 * r.monte_carlo_stderr);
  EXPECT_GT(r.monte_carlo_stderr, 0.0);
}

TEST(Average, SigmaInvarianceAndThreads) {
  const MarkovSetup s = markov_setup(5, Weight::jacobi(1.0), 2);
  const AverageCaseResult a = average_monte_carlo(s, 1.0, 2000, 9);
  const AverageCaseResult b = average_monte_carlo(s, 10.0, 2000, 9);
  EXPECT_LT(std::abs(a.monte_carlo_mean - b.monte_carlo_mean),
            3 * std::hypot(a.monte_carlo_stderr, b.monte_carlo_stderr));
  const AverageCaseResult c = average_monte_carlo(s, 1.0, 2000, 9, 4);
  EXPECT_DOUBLE_EQ(a.monte_carlo_mean, c.monte_carlo_mean);
  EXPECT_THROW(average_monte_carlo(s, 1.0, 50, 9), std::invalid_argument);
}

TEST(ExponentFit, SyntheticData) {
  std::vector<std::pair<double, double>> sq, flat, noisy;
  for (int n = 2; n <= 20; ++n) {
    sq.emplace_back(n, 3.0 * n * n);
    flat.emplace_back(n, 7.0);
    noisy.emplace_back(n, std::pow(n, 1.5) * (1 + 0.01 * std::sin(13.0 * n)));
  }
  EXPECT_NEAR(exponent_fit(sq).slope, 2.0, 1e-12);
  EXPECT_NEAR(exponent_fit(flat).slope, 0.0, 1e-12);
  EXPECT_GE(exponent_fit(noisy).slope, 1.45);
  EXPECT_LE(exponent_fit(noisy).slope, 1.55);
  const std::vector<std::pair<double, double>> bad{{1, 1}, {2, 0}, {3, 1}};
  EXPECT_THROW(exponent_fit(bad), std::invalid_argument);
}
