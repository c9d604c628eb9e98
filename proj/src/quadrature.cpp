#include "mball/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mball {

namespace {

constexpr double kPi = std::numbers::pi;

// Unnormalized surface area of S^{k-1} in R^k.
double sphere_area(int k) { return 2.0 * std::pow(kPi, 0.5 * k) / std::tgamma(0.5 * k); }

double log_jacobi_mass(double alpha, double beta) {
  return (alpha + beta + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
         std::lgamma(alpha + beta + 2.0);
}

struct Recurrence {
  std::vector<double> a;  // diagonal
  std::vector<double> b;  // b[k] couples p_{k-1} and p_k, k >= 1; b[0] unused
};

Recurrence jacobi_recurrence(int m, double alpha, double beta) {
  Recurrence r;
  r.a.resize(m + 1);
  r.b.assign(m + 1, 0.0);
  const double ab = alpha + beta;
  for (int k = 0; k <= m; ++k) {
    if (k == 0) {
      r.a[0] = (beta - alpha) / (ab + 2.0);
    } else {
      const double s = 2.0 * k + ab;
      r.a[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
  }
  for (int k = 1; k <= m; ++k) {
    double b2;
    if (k == 1) {
      b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      const double s = 2.0 * k + ab;
      b2 = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    r.b[k] = std::sqrt(b2);
  }
  return r;
}

// Orthonormal p_0..p_{m} at t; returns p_m and its derivative, accumulates
// sum_{j<m} p_j^2 into `sumsq`.
void orthonormal_eval(const Recurrence& r, int m, double p0, double t, double& pm, double& dpm,
                      double& sumsq) {
  double pprev = 0.0, p = p0, dprev = 0.0, dp = 0.0;
  sumsq = 0.0;
  for (int j = 0; j < m; ++j) {
    sumsq += p * p;
    const double pnext = ((t - r.a[j]) * p - (j > 0 ? r.b[j] * pprev : 0.0)) / r.b[j + 1];
    const double dnext = ((t - r.a[j]) * dp + p - (j > 0 ? r.b[j] * dprev : 0.0)) / r.b[j + 1];
    pprev = p;
    p = pnext;
    dprev = dp;
    dp = dnext;
  }
  pm = p;
  dpm = dp;
}

Eigen::VectorXd tridiagonal_eigenvalues(const Recurrence& r, int m) {
  Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
  for (int k = 0; k < m; ++k) diag[k] = r.a[k];
  for (int k = 1; k < m; ++k) sub[k - 1] = r.b[k];
  if (m == 1) return diag;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("Golub-Welsch eigensolver failed");
  return es.eigenvalues();
}

void append_angular(QuadratureRule& rule, double radius, double radial_weight,
                    const QuadratureRule& ang) {
  for (size_t j = 0; j < ang.size(); ++j) {
    for (int i = 0; i < rule.dim; ++i) rule.nodes.push_back(radius * ang.nodes[j * ang.dim + i]);
    rule.weights.push_back(radial_weight * ang.weights[j]);
  }
}

// Dirichlet rule on the k-simplex {u_i >= 0, sum u <= 1} for the density
// prod u_i^{a_i} (1 - sum u)^b, exact to degree m. Collapsed coordinates:
// u_k = s, (u_1..u_{k-1}) = (1-s) v.
void dirichlet_rule(std::span<const double> a, double b, int m, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  const int k = static_cast<int>(a.size());
  const int q = m / 2 + 1;
  if (k == 1) {
    const QuadratureRule gj = gauss_jacobi_1d(q, b, a[0]);
    const double scale = std::pow(0.5, b + a[0] + 1.0);
    for (size_t j = 0; j < gj.size(); ++j) {
      nodes.push_back(0.5 * (1.0 + gj.nodes[j]));
      weights.push_back(scale * gj.weights[j]);
    }
    return;
  }
  double rest = b + (k - 1);
  for (int i = 0; i < k - 1; ++i) rest += a[i];
  const QuadratureRule gj = gauss_jacobi_1d(q, rest, a[k - 1]);
  const double scale = std::pow(0.5, rest + a[k - 1] + 1.0);
  std::vector<double> sub_nodes, sub_weights;
  dirichlet_rule(a.first(k - 1), b, m, sub_nodes, sub_weights);
  for (size_t j = 0; j < gj.size(); ++j) {
    const double s = 0.5 * (1.0 + gj.nodes[j]);
    for (size_t l = 0; l < sub_weights.size(); ++l) {
      for (int i = 0; i < k - 1; ++i) nodes.push_back((1.0 - s) * sub_nodes[l * (k - 1) + i]);
      nodes.push_back(s);
      weights.push_back(scale * gj.weights[j] * sub_weights[l]);
    }
  }
}

QuadratureRule angular_rule(int degree, int dim) {
  return sphere_rule(degree, dim);
}

}  // namespace

double QuadratureRule::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

std::string QuadratureRule::describe() const {
  std::ostringstream os;
  switch (domain) {
    case RuleDomain::interval:
      os << "interval(alpha=" << alpha << ",beta=" << beta << ")";
      break;
    case RuleDomain::ball:
      os << "ball(d=" << dim << "," << (target ? target->to_string() : std::string("?")) << ")";
      break;
    case RuleDomain::sphere:
      os << "sphere(ambient=" << dim << ")";
      break;
  }
  os << " nodes=" << size() << " exactness=" << exactness;
  return os.str();
}

QuadratureRule gauss_jacobi_1d(int m, double alpha, double beta) {
  if (m < 1) throw std::invalid_argument("gauss_jacobi_1d: node count must be >= 1");
  if (!(alpha > -1.0) || !(beta > -1.0)) {
    throw std::invalid_argument("gauss_jacobi_1d: exponents must exceed -1");
  }
  const Recurrence rec = jacobi_recurrence(m, alpha, beta);
  const double mass = std::exp(log_jacobi_mass(alpha, beta));
  const double p0 = 1.0 / std::sqrt(mass);
  Eigen::VectorXd x = tridiagonal_eigenvalues(rec, m);

  QuadratureRule rule;
  rule.domain = RuleDomain::interval;
  rule.dim = 1;
  rule.exactness = 2 * m - 1;
  rule.alpha = alpha;
  rule.beta = beta;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int k = 0; k < m; ++k) {
    double t = x[k];
    double pm = 0.0, dpm = 0.0, sumsq = 0.0;
    // Newton polish on the eigenvalue estimate.
    for (int it = 0; it < 3; ++it) {
      orthonormal_eval(rec, m, p0, t, pm, dpm, sumsq);
      if (dpm == 0.0) break;
      const double step = pm / dpm;
      if (!std::isfinite(step) || std::abs(step) > 1e-6) break;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    orthonormal_eval(rec, m, p0, t, pm, dpm, sumsq);
    rule.nodes[k] = std::clamp(t, -1.0 + 1e-300, 1.0 - 1e-300);
    rule.weights[k] = 1.0 / sumsq;
  }
  // Christoffel numbers are accurate relative to each other; fix the mass.
  const double scale = mass / rule.total_weight();
  for (double& w : rule.weights) w *= scale;
  std::vector<size_t> order(m);
  for (int k = 0; k < m; ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return rule.nodes[i] < rule.nodes[j]; });
  QuadratureRule sorted = rule;
  for (int k = 0; k < m; ++k) {
    sorted.nodes[k] = rule.nodes[order[k]];
    sorted.weights[k] = rule.weights[order[k]];
  }
  if (alpha == beta) {
    // Enforce exact symmetry.
    for (int k = 0; k < m / 2; ++k) {
      const double t = 0.5 * (sorted.nodes[m - 1 - k] - sorted.nodes[k]);
      const double w = 0.5 * (sorted.weights[m - 1 - k] + sorted.weights[k]);
      sorted.nodes[k] = -t;
      sorted.nodes[m - 1 - k] = t;
      sorted.weights[k] = sorted.weights[m - 1 - k] = w;
    }
    if (m % 2 == 1) sorted.nodes[m / 2] = 0.0;
  }
  return sorted;
}

QuadratureRule gauss_legendre_1d(int m) { return gauss_jacobi_1d(m, 0.0, 0.0); }

QuadratureRule sphere_rule(int degree, int ambient_dim) {
  if (degree < 0) throw std::invalid_argument("sphere_rule: degree must be >= 0");
  if (ambient_dim < 2 || ambient_dim > 4) {
    throw std::invalid_argument("sphere_rule: ambient dimension must be 2, 3 or 4");
  }
  QuadratureRule rule;
  rule.domain = RuleDomain::sphere;
  rule.dim = ambient_dim;
  rule.exactness = degree;
  if (ambient_dim == 2) {
    const int m = degree + 1;
    for (int j = 0; j < m; ++j) {
      const double phi = 2.0 * kPi * j / m;
      rule.nodes.push_back(std::cos(phi));
      rule.nodes.push_back(std::sin(phi));
      rule.weights.push_back(1.0 / m);
    }
    return rule;
  }
  // x = (sqrt(1-t^2) eta, t) with d sigma ~ (1-t^2)^{(k-3)/2} dt d eta.
  const double e = 0.5 * (ambient_dim - 3);
  const QuadratureRule gj = gauss_jacobi_1d(degree / 2 + 1, e, e);
  const QuadratureRule sub = sphere_rule(degree, ambient_dim - 1);
  const double mass = gj.total_weight();
  for (size_t j = 0; j < gj.size(); ++j) {
    const double t = gj.nodes[j];
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    for (size_t l = 0; l < sub.size(); ++l) {
      for (int i = 0; i < ambient_dim - 1; ++i) rule.nodes.push_back(s * sub.nodes[l * sub.dim + i]);
      rule.nodes.push_back(t);
      rule.weights.push_back(gj.weights[j] / mass * sub.weights[l]);
    }
  }
  return rule;
}

QuadratureRule ball_rule(int degree, double mu, int dim) {
  if (degree < 0) throw std::invalid_argument("ball_rule: degree must be >= 0");
  if (mu < 0.0) throw std::invalid_argument("ball_rule: mu must be >= 0");
  if (dim != 2 && dim != 3) throw std::invalid_argument("ball_rule: d must be 2 or 3");
  QuadratureRule rule;
  rule.domain = RuleDomain::ball;
  rule.dim = dim;
  rule.exactness = degree;
  rule.target = Weight::jacobi(mu);

  // Angular averages of a degree-`degree` polynomial are polynomials of
  // degree floor(degree/2) in r^2 = (1+t)/2.
  const int radial_degree = degree / 2;
  const double alpha = mu - 0.5;
  const double beta = 0.5 * (dim - 2);
  const QuadratureRule radial = gauss_jacobi_1d(radial_degree / 2 + 1, alpha, beta);
  const double jac = std::pow(0.5, beta) * std::pow(0.5, alpha) / 4.0 * sphere_area(dim);
  const QuadratureRule ang = angular_rule(degree, dim);
  for (size_t k = 0; k < radial.size(); ++k) {
    const double r = std::sqrt(0.5 * (1.0 + radial.nodes[k]));
    append_angular(rule, r, jac * radial.weights[k], ang);
  }
  return rule;
}

QuadratureRule weight_rule(const Weight& w, int degree, int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("weight_rule: d must be 2 or 3");
  if (w.required_dim() != 0 && w.required_dim() != dim) {
    throw std::invalid_argument("weight_rule: weight dimension does not match d");
  }
  switch (w.kind()) {
    case Weight::Kind::jacobi:
      return ball_rule(degree, w.mu(), dim);
    case Weight::Kind::product: {
      QuadratureRule rule;
      rule.domain = RuleDomain::ball;
      rule.dim = dim;
      rule.exactness = degree;
      rule.target = w;
      std::vector<double> a(dim);
      for (int i = 0; i < dim; ++i) a[i] = w.gammas()[i] - 0.5;
      std::vector<double> un, uw;
      dirichlet_rule(a, w.mu() - 0.5, degree / 2, un, uw);
      const int signs = 1 << dim;
      for (size_t k = 0; k < uw.size(); ++k) {
        for (int s = 0; s < signs; ++s) {
          for (int i = 0; i < dim; ++i) {
            const double v = std::sqrt(std::max(0.0, un[k * dim + i]));
            rule.nodes.push_back(((s >> i) & 1) ? -v : v);
          }
          rule.weights.push_back(uw[k] / signs);
        }
      }
      return rule;
    }
    case Weight::Kind::radial_step: {
      QuadratureRule rule;
      rule.domain = RuleDomain::ball;
      rule.dim = dim;
      rule.exactness = degree;
      rule.target = w;
      // r^{d-1} times an even polynomial of degree <= degree in r.
      const int q = (degree + dim - 1) / 2 + 1;
      const QuadratureRule gl = gauss_legendre_1d(q);
      const QuadratureRule ang = angular_rule(degree, dim);
      const double area = sphere_area(dim);
      const double a = w.step_radius();
      for (int piece = 0; piece < 2; ++piece) {
        const double lo = piece == 0 ? 0.0 : a;
        const double hi = piece == 0 ? a : 1.0;
        const double value = piece == 0 ? 1.0 : w.step_value();
        for (size_t k = 0; k < gl.size(); ++k) {
          const double r = lo + 0.5 * (hi - lo) * (1.0 + gl.nodes[k]);
          const double rw = 0.5 * (hi - lo) * gl.weights[k] * std::pow(r, dim - 1) * value * area;
          append_angular(rule, r, rw, ang);
        }
      }
      return rule;
    }
  }
  throw std::logic_error("unreachable");
}

int oversampled_degree(int deg, double p) {
  const double rounded = std::round(p);
  if (rounded == p && static_cast<long>(rounded) % 2 == 0) return static_cast<int>(rounded) * deg;
  return std::max(2 * deg + 20, static_cast<int>(std::ceil(p)) * deg + 20);
}

double weighted_norm_values(std::span<const double> values, double p, std::span<const double> weights) {
  if (!(p >= 1.0)) throw std::invalid_argument("weighted_norm: p must be >= 1");
  double s = 0.0;
  if (p == 2.0) {
    for (size_t k = 0; k < values.size(); ++k) s += weights[k] * values[k] * values[k];
    return std::sqrt(s);
  }
  for (size_t k = 0; k < values.size(); ++k) s += weights[k] * std::pow(std::abs(values[k]), p);
  return std::pow(s, 1.0 / p);
}

double weighted_norm(const BallFunction& f, const Weight& w, double p, const QuadratureRule& rule,
                     bool allow_reweight) {
  if (!(p >= 1.0)) throw std::invalid_argument("weighted_norm: p must be >= 1");
  if (rule.domain != RuleDomain::ball || !rule.target) {
    throw std::invalid_argument("weighted_norm: needs a ball rule");
  }
  const bool same = *rule.target == w;
  if (!same && !allow_reweight) {
    throw std::invalid_argument("weighted_norm: rule target " + rule.target->to_string() +
                                " does not match weight " + w.to_string());
  }
  std::vector<double> values(rule.size()), weights(rule.weights);
  for (size_t k = 0; k < rule.size(); ++k) {
    const Point x = rule.point(k);
    values[k] = f(x);
    if (!same) {
      const double base = rule.target->eval(x);
      weights[k] *= w.eval(x) / base;
    }
  }
  return weighted_norm_values(values, p, weights);
}

double integrate_interval_split(const std::function<double(double)>& f, double e,
                                std::vector<double> breaks, int m) {
  std::erase_if(breaks, [](double b) { return !(b > -1.0 && b < 1.0); });
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               breaks.end());
  if (breaks.empty()) {
    const QuadratureRule gj = gauss_jacobi_1d(m, e, e);
    double s = 0.0;
    for (size_t k = 0; k < gj.size(); ++k) s += gj.weights[k] * f(gj.nodes[k]);
    return s;
  }
  double total = 0.0;
  // Left endpoint panel: (1+t)^e handled by the rule, (1-t)^e is smooth.
  {
    const double b = breaks.front();
    const double h = 0.5 * (b + 1.0);
    const QuadratureRule gj = gauss_jacobi_1d(m, 0.0, e);
    for (size_t k = 0; k < gj.size(); ++k) {
      const double t = -1.0 + h * (1.0 + gj.nodes[k]);
      total += gj.weights[k] * std::pow(h, e + 1.0) * std::pow(1.0 - t, e) * f(t);
    }
  }
  {
    const double b = breaks.back();
    const double h = 0.5 * (1.0 - b);
    const QuadratureRule gj = gauss_jacobi_1d(m, e, 0.0);
    for (size_t k = 0; k < gj.size(); ++k) {
      const double t = b + h * (1.0 + gj.nodes[k]);
      total += gj.weights[k] * std::pow(h, e + 1.0) * std::pow(1.0 + t, e) * f(t);
    }
  }
  const QuadratureRule gl = gauss_legendre_1d(m);
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = breaks[i], hi = breaks[i + 1];
    const double h = 0.5 * (hi - lo);
    for (size_t k = 0; k < gl.size(); ++k) {
      const double t = lo + h * (1.0 + gl.nodes[k]);
      total += h * gl.weights[k] * std::pow(1.0 - t * t, e) * f(t);
    }
  }
  return total;
}

void write_rule_csv(std::ostream& os, const QuadratureRule& rule) {
  os << "index,weight";
  for (int i = 0; i < rule.dim; ++i) os << ",coord_" << i;
  os << '\n';
  os.precision(17);
  for (size_t k = 0; k < rule.size(); ++k) {
    os << k << ',' << rule.weights[k];
    for (int i = 0; i < rule.dim; ++i) os << ',' << rule.nodes[k * rule.dim + i];
    os << '\n';
  }
}

}  // namespace mball
