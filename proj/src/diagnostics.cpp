#include "mball/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mball/kernels.hpp"
#include "mball/polyspace.hpp"
#include "mball/quadrature.hpp"
#include "mball/random.hpp"

namespace mball {

std::vector<Point> random_ball_points(int dim, int count, std::uint64_t seed) {
  std::vector<Point> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    double c[kMaxDim] = {0, 0, 0};
    double nrm = 0.0;
    for (int j = 0; j < dim; ++j) {
      c[j] = counter_gaussian(seed, i, j);
      nrm += c[j] * c[j];
    }
    const double r = std::pow(counter_uniform(seed, i, dim, 1), 1.0 / dim) / std::sqrt(nrm);
    for (int j = 0; j < dim; ++j) c[j] *= r;
    pts.emplace_back(std::span<const double>(c, dim));
  }
  return pts;
}

ReproducingReport reproducing_residual(int n, double mu, int dim, int trials, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("reproducing_residual: n must be >= 1");
  const OrthoBasis basis = orthonormal_basis(n, Weight::jacobi(mu), dim);
  const QuadratureRule rule = ball_rule(3 * n, mu, dim);
  const Eigen::MatrixXd V = basis.eval_nodes(rule);
  const std::vector<double> c = cutoff_coefficients(n);

  std::vector<Point> xs = random_ball_points(dim, 12, seed + 101);
  xs.push_back(Point::origin(dim));
  xs.push_back(Point::axis(dim, 0, 1.0));
  xs.push_back(Point::axis(dim, dim - 1, -1.0));
  {
    std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    xs.emplace_back(std::span<const double>(v));
  }
  // Kernel and its x-gradient at every (x, node) pair.
  std::vector<Eigen::VectorXd> K(xs.size());
  std::vector<Eigen::MatrixXd> G(xs.size());
  for (size_t a = 0; a < xs.size(); ++a) {
    K[a].resize(rule.size());
    G[a].resize(rule.size(), dim);
    for (size_t q = 0; q < rule.size(); ++q) {
      const Point y = rule.point(q);
      K[a][q] = rule.weights[q] * kernel_series(c, mu, xs[a], y);
      G[a].row(q) = rule.weights[q] * kernel_series_gradient(c, mu, xs[a], y).transpose();
    }
  }
  const std::vector<Point> grid = ball_grid(dim, 2000);
  Eigen::MatrixXd Vg(grid.size(), basis.size());
  std::vector<Eigen::MatrixXd> Gg(dim, Eigen::MatrixXd(grid.size(), basis.size()));
  for (size_t g = 0; g < grid.size(); ++g) {
    const Eigen::MatrixXd vg = graded_ball_values_and_gradient(grid[g].coords(), n);
    Vg.row(g) = (basis.coeffs * vg.col(0)).transpose();
    for (int i = 0; i < dim; ++i) Gg[i].row(g) = (basis.coeffs * vg.col(i + 1)).transpose();
  }

  ReproducingReport rep;
  rep.trials = trials;
  Eigen::VectorXd coef(basis.size());
  for (int t = 0; t < trials; ++t) {
    for (int j = 0; j < basis.size(); ++j) coef[j] = counter_gaussian(seed, t, j);
    const Eigen::VectorXd at_nodes = V * coef;
    double sup = (Vg * coef).cwiseAbs().maxCoeff();
    std::vector<double> dsup(dim);
    for (int i = 0; i < dim; ++i) dsup[i] = (Gg[i] * coef).cwiseAbs().maxCoeff();
    for (size_t a = 0; a < xs.size(); ++a) {
      const double px = basis.eval(xs[a]).dot(coef);
      const Eigen::VectorXd gx = basis.gradient(xs[a].coords()).transpose() * coef;
      sup = std::max(sup, std::abs(px));
      for (int i = 0; i < dim; ++i) dsup[i] = std::max(dsup[i], std::abs(gx[i]));
      rep.value_residual = std::max(rep.value_residual, std::abs(K[a].dot(at_nodes) - px) / sup);
      const Eigen::VectorXd gi = G[a].transpose() * at_nodes;
      for (int i = 0; i < dim; ++i) {
        rep.derivative_residual = std::max(rep.derivative_residual, std::abs(gi[i] - gx[i]) / dsup[i]);
      }
    }
  }
  return rep;
}

namespace {

double min_boundary_factor(const Point& x, int n) {
  const double h = x.height();
  return h > 0.0 ? std::min(1.0 / h, static_cast<double>(n)) : static_cast<double>(n);
}

}  // namespace

double derivative_kernel_ratio(int n, double mu, int dim, double k, int samples, std::uint64_t seed) {
  const std::vector<double> c = cutoff_coefficients(n);
  std::vector<Point> xs = random_ball_points(dim, samples, seed);
  xs.push_back(Point::axis(dim, 0, 1.0));
  xs.push_back(Point::axis(dim, 0, 1.0 - 1.0 / (static_cast<double>(n) * n)));
  const std::vector<Point> ys = random_ball_points(dim, 4, seed + 17);
  double worst = 0.0;
  for (const Point& x : xs) {
    std::vector<Point> partners = ys;
    partners.push_back(x);
    for (const Point& y : partners) {
      const Eigen::VectorXd g = kernel_series_gradient(c, mu, x, y);
      const double scale = std::sqrt(W_mu(mu, n, x) * W_mu(mu, n, y)) * std::pow(1.0 + n * dist(x, y), k) /
                           (min_boundary_factor(x, n) * std::pow(n, dim + 1));
      worst = std::max(worst, g.cwiseAbs().maxCoeff() * scale);
    }
  }
  return worst;
}

double lipschitz_ratio(int n, double mu, int dim, double delta, double k, int samples, std::uint64_t seed) {
  const std::vector<double> c = cutoff_coefficients(n);
  const std::vector<Point> ys = random_ball_points(dim, samples, seed);
  const std::vector<Point> us = random_ball_points(dim, 4, seed + 29);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Point& y = ys[s];
    // z: a small random displacement of y, shrunk until d(y, z) <= delta / n.
    double step = delta / n;
    Point z = y;
    for (int tries = 0; tries < 60; ++tries) {
      double v[kMaxDim] = {0, 0, 0};
      double r2 = 0.0;
      for (int j = 0; j < dim; ++j) {
        v[j] = y[j] + step * counter_gaussian(seed + 3, s, j) / std::sqrt(static_cast<double>(dim));
        r2 += v[j] * v[j];
      }
      if (r2 < 1.0) {
        Point cand(std::span<const double>(v, dim));
        if (dist(y, cand) <= delta / n && dist(y, cand) > 0.0) {
          z = cand;
          break;
        }
      }
      step *= 0.5;
    }
    const double dyz = dist(y, z);
    if (!(dyz > 0.0)) continue;
    for (const Point& u : us) {
      const double diff = std::abs(kernel_series(c, mu, y, u) - kernel_series(c, mu, z, u));
      const double scale = std::sqrt(W_mu(mu, n, u) * W_mu(mu, n, y)) * std::pow(1.0 + n * dist(u, y), k) /
                           (std::pow(n, dim + 1) * dyz);
      worst = std::max(worst, diff * scale);
    }
  }
  return worst;
}

double l1_growth(int n, double mu, int dim, int samples, std::uint64_t seed) {
  std::vector<Point> ys = random_ball_points(dim, samples, seed);
  ys.push_back(Point::origin(dim));
  ys.push_back(Point::axis(dim, 0, 1.0 - 1.0 / (static_cast<double>(n) * n)));
  double worst = 0.0;
  for (const Point& y : ys) {
    for (int i = 0; i < dim; ++i) {
      worst = std::max(worst, Ln_partial_L1(n, mu, i, y, true));
      worst = std::max(worst, Ln_partial_L1(n, mu, i, y, false));
    }
  }
  return worst / (static_cast<double>(n) * n);
}

MaximalReport maximal_equivalence(int n, const Weight& w, int dim, double p, double beta, int samples,
                                  std::uint64_t seed) {
  const OrthoBasis basis = orthonormal_basis(n, w, dim);
  const QuadratureRule rule = weight_rule(w, oversampled_degree(n, p), dim);
  const Eigen::MatrixXd V = basis.eval_nodes(rule);
  std::vector<Point> probes = ball_grid(dim, 2000);
  for (size_t q = 0; q < rule.size(); ++q) probes.push_back(rule.point(q));
  Eigen::MatrixXd P(probes.size(), basis.size());
  for (size_t j = 0; j < probes.size(); ++j) P.row(j) = basis.eval(probes[j]).transpose();
  Eigen::MatrixXd decay(rule.size(), probes.size());
  for (size_t q = 0; q < rule.size(); ++q) {
    const Point x = rule.point(q);
    for (size_t j = 0; j < probes.size(); ++j) decay(q, j) = std::pow(1.0 + n * dist(x, probes[j]), -beta);
  }
  MaximalReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  Eigen::VectorXd coef(basis.size());
  for (int s = 0; s < samples; ++s) {
    for (int j = 0; j < basis.size(); ++j) coef[j] = counter_gaussian(seed, s, j);
    const Eigen::VectorXd f = V * coef;
    const Eigen::VectorXd fp = (P * coef).cwiseAbs();
    std::vector<double> fstar(rule.size());
    for (size_t q = 0; q < rule.size(); ++q) fstar[q] = (decay.row(q).transpose().cwiseProduct(fp)).maxCoeff();
    const double ratio = weighted_norm_values(fstar, p, rule.weights) /
                         weighted_norm_values(std::span<const double>(f.data(), f.size()), p, rule.weights);
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

}  // namespace mball
