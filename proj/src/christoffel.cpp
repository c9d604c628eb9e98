#include "mball/christoffel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "mball/errors.hpp"
#include "mball/random.hpp"

namespace mball {

namespace {

void check_dims(const Weight& w, const Point& x) {
  if (w.required_dim() != 0 && w.required_dim() != x.dim()) {
    throw std::invalid_argument("christoffel: weight dimension does not match the point");
  }
}

// Ratio target/w at a ball-rule node when the rule targets another weight.
double reweight_factor(const QuadratureRule& rule, const Weight& w, const Point& x) {
  if (!rule.target || *rule.target == w) return 1.0;
  return w.eval(x) / rule.target->eval(x);
}

}  // namespace

double christoffel_l2(const OrthoBasis& basis, const Point& x) {
  if (x.dim() != basis.dim) throw std::invalid_argument("christoffel_l2: dimension mismatch");
  return 1.0 / basis.eval(x).squaredNorm();
}

double christoffel_variational(int n, const Weight& w, const Point& x, const QuadratureRule& rule) {
  check_dims(w, x);
  if (rule.domain != RuleDomain::ball || rule.dim != x.dim()) {
    throw std::invalid_argument("christoffel_variational: needs a ball rule of matching dimension");
  }
  if (rule.exactness < 2 * n) throw std::invalid_argument("christoffel_variational: rule exactness < 2n");
  const int N = dim_pi(n, x.dim());
  Eigen::MatrixXd A(rule.size(), N);
  for (size_t q = 0; q < rule.size(); ++q) {
    const double c = std::sqrt(rule.weights[q] * reweight_factor(rule, w, rule.point(q)));
    A.row(q) = c * graded_ball_values(rule.node(q), n).transpose();
  }
  // min |A c|^2 subject to phi(x).c = 1  ->  1 / |R^{-T} phi(x)|^2
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(N).triangularView<Eigen::Upper>();
  const Eigen::VectorXd phi = graded_ball_values(x.coords(), n);
  const Eigen::VectorXd z = R.transpose().triangularView<Eigen::Lower>().solve(phi);
  return 1.0 / z.squaredNorm();
}

ChristoffelLpResult christoffel_lp(int n, double p, const Weight& w, const Point& x, const QuadratureRule& rule) {
  if (!(p >= 1.0)) throw std::invalid_argument("christoffel_lp: p must be >= 1");
  if (n < 0) throw std::invalid_argument("christoffel_lp: n must be >= 0");
  check_dims(w, x);
  const int d = x.dim();
  const OrthoBasis basis = orthonormal_basis(n, w, d);
  const Eigen::VectorXd v = basis.eval(x);
  Eigen::MatrixXd V = basis.eval_nodes(rule);
  Eigen::VectorXd om(rule.size());
  for (size_t q = 0; q < rule.size(); ++q) om[q] = rule.weights[q] * reweight_factor(rule, w, rule.point(q));

  auto objective = [&](const Eigen::VectorXd& a) {
    const Eigen::VectorXd vals = V * a;
    double s = 0.0;
    for (Eigen::Index q = 0; q < vals.size(); ++q) s += om[q] * std::pow(std::abs(vals[q]), p);
    return s;
  };
  // Weighted least squares with P(x) = 1: a = G^{-1} v / (v^T G^{-1} v).
  auto constrained = [&](const Eigen::VectorXd& r) {
    const Eigen::MatrixXd G = V.transpose() * r.asDiagonal() * V;
    const Eigen::VectorXd g = G.ldlt().solve(v);
    return Eigen::VectorXd(g / v.dot(g));
  };

  ChristoffelLpResult res;
  Eigen::VectorXd a = v / v.squaredNorm();
  double f = objective(a);
  res.start_objective = f;
  Eigen::VectorXd best = a;
  double best_f = f;
  if (p == 2.0 || n == 0) {
    res.value = f;
    res.converged = true;
    return res;
  }
  const double damping = p > 2.0 ? 1.0 / (p - 1.0) : 1.0;
  for (int it = 1; it <= 200; ++it) {
    const Eigen::VectorXd vals = V * a;
    Eigen::VectorXd r(vals.size());
    for (Eigen::Index q = 0; q < vals.size(); ++q) r[q] = om[q] * std::pow(std::max(std::abs(vals[q]), 1e-12), p - 2.0);
    Eigen::VectorXd next = constrained(r);
    next = damping * next + (1.0 - damping) * a;
    const double fn = objective(next);
    res.iterations = it;
    if (!std::isfinite(fn)) break;
    const double change = std::abs(fn - f) / std::max(std::abs(fn), std::numeric_limits<double>::min());
    a = next;
    f = fn;
    if (f < best_f) {
      best_f = f;
      best = a;
    }
    if (change < 1e-9) {
      res.converged = true;
      break;
    }
  }
  res.value = best_f;
  return res;
}

ChristoffelLpResult christoffel_lp(int n, double p, const Weight& w, const Point& x) {
  return christoffel_lp(n, p, w, x, weight_rule(w, oversampled_degree(n, p), x.dim()));
}

double ChristoffelScan::window() const {
  if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : rows) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  return hi / lo;
}

std::vector<Point> default_scan_points(int n, int dim) {
  std::vector<Point> pts;
  for (double r : {0.0, 0.5, 0.9, 0.99, 1.0 - 1.0 / (static_cast<double>(n) * n)}) {
    pts.push_back(Point::axis(dim, 0, r));
  }
  return pts;
}

ChristoffelScan christoffel_scan(const Weight& w, double p, std::span<const int> n_set, int dim,
                                 std::span<const Point> x_set) {
  ChristoffelScan scan;
  scan.weight = w;
  scan.p = p;
  for (int n : n_set) {
    if (n < 1) throw std::invalid_argument("christoffel_scan: n must be >= 1");
    const std::vector<Point> pts =
        x_set.empty() ? default_scan_points(n, dim) : std::vector<Point>(x_set.begin(), x_set.end());
    std::optional<OrthoBasis> basis;
    std::optional<QuadratureRule> rule;
    if (p == 2.0) {
      basis = orthonormal_basis(n, w, dim);
    } else {
      rule = weight_rule(w, oversampled_degree(n, p), dim);
    }
    for (const Point& x : pts) {
      ChristoffelRow row;
      row.n = n;
      row.x = x;
      if (basis) {
        row.lambda = christoffel_l2(*basis, x);
      } else {
        const ChristoffelLpResult r = christoffel_lp(n, p, w, x, *rule);
        row.lambda = r.value;
        row.converged = r.converged;
      }
      row.ball_measure = ball_measure(w, x, 1.0 / n);
      row.ratio = row.lambda / row.ball_measure;
      scan.rows.push_back(row);
    }
  }
  return scan;
}

void write_christoffel_csv(std::ostream& os, const ChristoffelScan& scan) {
  os << "n,p,x_norm,lambda,ball_measure,ratio\n";
  os.precision(17);
  for (const auto& r : scan.rows) {
    os << r.n << ',' << scan.p << ',' << r.x.norm() << ',' << r.lambda << ',' << r.ball_measure << ',' << r.ratio
       << '\n';
  }
}

MollifiedNormWindow mollified_norm_ratio(const Weight& w, int n, double p, int dim, int samples,
                                         std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("mollified_norm_ratio: samples must be >= 1");
  const OrthoBasis basis = orthonormal_basis(n, w, dim);
  const QuadratureRule rule = weight_rule(w, oversampled_degree(n, p), dim);
  const Eigen::MatrixXd V = basis.eval_nodes(rule);
  const MollifiedWeight wn(w, n);
  std::vector<double> wn_weights(rule.size());
  for (size_t q = 0; q < rule.size(); ++q) {
    const Point x = rule.point(q);
    wn_weights[q] = rule.weights[q] * wn(x) / w.eval(x);
  }
  MollifiedNormWindow out;
  out.samples = samples;
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = 0.0;
  Eigen::VectorXd a(basis.size());
  for (int s = 0; s < samples; ++s) {
    for (int j = 0; j < basis.size(); ++j) a[j] = counter_gaussian(seed, s, j);
    const Eigen::VectorXd vals = V * a;
    const std::span<const double> vs(vals.data(), vals.size());
    const double ratio = weighted_norm_values(vs, p, wn_weights) / weighted_norm_values(vs, p, rule.weights);
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
  }
  return out;
}

}  // namespace mball
