#include "mball/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

#include "mball/errors.hpp"
#include "mball/quadrature.hpp"

namespace mball {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Jacobi rules are reused across many kernel evaluations.
const QuadratureRule& cached_gauss_jacobi(int m, double alpha, double beta) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, double>, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(m, alpha, beta);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, gauss_jacobi_1d(m, alpha, beta)).first;
  return it->second;
}

void check_mu(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("kernel: mu must be >= 0");
}

void check_pair(const Point& x, const Point& y) {
  if (x.dim() != y.dim()) throw std::invalid_argument("kernel: dimension mismatch");
  if (x.dim() < 2) throw std::invalid_argument("kernel: d must be 2 or 3");
}

double dot(const Point& x, const Point& y) {
  double s = 0.0;
  for (int i = 0; i < x.dim(); ++i) s += x[i] * y[i];
  return s;
}

double sphere_area(int d) {
  // |S^d|
  return 2.0 * std::pow(kPi, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1));
}

void check_basis_for_kernel(const OrthoBasis& basis, int min_degree) {
  if (basis.weight.kind() != Weight::Kind::jacobi) {
    throw std::invalid_argument("kernel basis sums need a jacobi-weight basis");
  }
  if (basis.degree < min_degree) {
    throw std::invalid_argument("kernel basis degree " + std::to_string(basis.degree) + " < required " +
                                std::to_string(min_degree));
  }
}

}  // namespace

void gegenbauer_all(int n, double lambda, double t, std::span<double> out) {
  if (n < 0) return;
  out[0] = 1.0;
  if (n >= 1) out[1] = 2.0 * lambda * t;
  for (int k = 1; k < n; ++k) {
    out[k + 1] = (2.0 * (k + lambda) * t * out[k] - (k + 2.0 * lambda - 1.0) * out[k - 1]) / (k + 1.0);
  }
}

double gegenbauer(int n, double lambda, double t) {
  if (n < 0) throw std::invalid_argument("gegenbauer: n must be >= 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("gegenbauer: lambda must be > 0");
  if (!(std::abs(t) <= 1.0 + 1e-12)) throw std::invalid_argument("gegenbauer: t must lie in [-1, 1]");
  std::vector<double> v(n + 1);
  gegenbauer_all(n, lambda, t, v);
  return v[n];
}

double kernel_lambda(double mu, int d) { return mu + 0.5 * (d - 1); }

double ball_normalizer(double mu, int d) {
  check_mu(mu);
  return 1.0 / Weight::jacobi(mu).total_mass(d);
}

double interval_normalizer(double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("interval_normalizer: mu must be > 0");
  // int (1-u^2)^{mu-1} du = B(1/2, mu)
  return std::exp(std::lgamma(mu + 0.5) - std::lgamma(0.5) - std::lgamma(mu));
}

double cutoff_eta(double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("cutoff_eta: t must be >= 0");
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const double a = std::exp(-1.0 / (2.0 - t));
  const double b = std::exp(-1.0 / (t - 1.0));
  return a / (a + b);
}

const char* to_string(KernelMethod m) {
  return m == KernelMethod::gegenbauer_integral ? "gegenbauer-integral" : "basis-sum";
}

double kernel_series(std::span<const double> coeffs, double mu, const Point& x, const Point& y) {
  check_mu(mu);
  check_pair(x, y);
  const int J = static_cast<int>(coeffs.size()) - 1;
  if (J < 0) return 0.0;
  const int d = x.dim();
  const double lambda = kernel_lambda(mu, d);
  const double bd = ball_normalizer(mu, d);
  const double a = dot(x, y), b = x.height() * y.height();
  std::vector<double> cj(J + 1);
  std::vector<double> scaled(J + 1);
  for (int j = 0; j <= J; ++j) scaled[j] = coeffs[j] * (lambda + j) / lambda;
  auto series = [&](double t) {
    gegenbauer_all(J, lambda, t, cj);
    double s = 0.0;
    for (int j = 0; j <= J; ++j) s += scaled[j] * cj[j];
    return s;
  };
  if (mu == 0.0) return bd * 0.5 * (series(a + b) + series(a - b));
  const QuadratureRule& r = cached_gauss_jacobi(J / 2 + 1, mu - 1.0, mu - 1.0);
  double s = 0.0;
  for (size_t q = 0; q < r.size(); ++q) s += r.weights[q] * series(a + r.nodes[q] * b);
  return bd * interval_normalizer(mu) * s;
}

Eigen::VectorXd kernel_series_gradient(std::span<const double> coeffs, double mu, const Point& x,
                                       const Point& y) {
  check_mu(mu);
  check_pair(x, y);
  const int d = x.dim();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
  const int J = static_cast<int>(coeffs.size()) - 1;
  if (J < 1) return grad;
  const double lambda = kernel_lambda(mu, d);
  const double bd = ball_normalizer(mu, d);
  const double a = dot(x, y), b = x.height() * y.height();
  const double sy2 = std::max(0.0, 1.0 - y.norm2());
  std::vector<double> scaled(J + 1);
  for (int j = 0; j <= J; ++j) scaled[j] = coeffs[j] * (lambda + j) / lambda;
  std::vector<double> c1(J + 1), c2(J + 1);
  // sum_j scaled_j C_j'(t) with C_j' = 2 lambda C_{j-1}^{lambda+1}
  auto first = [&](double t) {
    gegenbauer_all(J - 1, lambda + 1.0, t, c1);
    double s = 0.0;
    for (int j = 1; j <= J; ++j) s += scaled[j] * c1[j - 1];
    return 2.0 * lambda * s;
  };
  // C_j'' = 4 lambda (lambda+1) C_{j-2}^{lambda+2}
  auto second = [&](double t) {
    if (J < 2) return 0.0;
    gegenbauer_all(J - 2, lambda + 2.0, t, c2);
    double s = 0.0;
    for (int j = 2; j <= J; ++j) s += scaled[j] * c2[j - 2];
    return 4.0 * lambda * (lambda + 1.0) * s;
  };
  double i1 = 0.0, i2 = 0.0;
  if (mu == 0.0) {
    i1 = 0.5 * (first(a + b) + first(a - b));
    const QuadratureRule& r = cached_gauss_jacobi(J / 2 + 1, 0.0, 0.0);
    for (size_t q = 0; q < r.size(); ++q) i2 += r.weights[q] * second(a + r.nodes[q] * b);
    i2 *= 0.5;
    i1 *= bd;
    i2 *= bd;
  } else {
    const double b1 = interval_normalizer(mu);
    const QuadratureRule& r1 = cached_gauss_jacobi(J / 2 + 1, mu - 1.0, mu - 1.0);
    for (size_t q = 0; q < r1.size(); ++q) i1 += r1.weights[q] * first(a + r1.nodes[q] * b);
    const QuadratureRule& r2 = cached_gauss_jacobi(J / 2 + 1, mu, mu);
    for (size_t q = 0; q < r2.size(); ++q) i2 += r2.weights[q] * second(a + r2.nodes[q] * b);
    i1 *= bd * b1;
    i2 *= bd * b1 / (2.0 * mu);
  }
  for (int i = 0; i < d; ++i) grad[i] = y[i] * i1 - x[i] * sy2 * i2;
  return grad;
}

KernelEval reproducing_kernel(int n, double mu, const Point& x, const Point& y) {
  if (n < 0) throw std::invalid_argument("reproducing_kernel: n must be >= 0");
  std::vector<double> c(n + 1, 0.0);
  c[n] = 1.0;
  return {n, mu, kernel_series(c, mu, x, y), KernelMethod::gegenbauer_integral};
}

KernelEval reproducing_kernel_basis(const OrthoBasis& basis, int n, const Point& x, const Point& y) {
  check_basis_for_kernel(basis, n);
  const Eigen::VectorXd px = basis.eval(x), py = basis.eval(y);
  const int lo = basis.block_start(n), hi = dim_pi(n, basis.dim);
  return {n, basis.weight.mu(), px.segment(lo, hi - lo).dot(py.segment(lo, hi - lo)), KernelMethod::basis_sum};
}

std::vector<double> cutoff_coefficients(int n) {
  if (n < 1) throw std::invalid_argument("L_n needs n >= 1");
  std::vector<double> c(2 * n);
  for (int j = 0; j < 2 * n; ++j) c[j] = cutoff_eta(static_cast<double>(j) / n);
  return c;
}

KernelEval Ln_kernel(int n, double mu, const Point& x, const Point& y) {
  return {n, mu, kernel_series(cutoff_coefficients(n), mu, x, y), KernelMethod::gegenbauer_integral};
}

KernelEval Ln_kernel_basis(const OrthoBasis& basis, int n, const Point& x, const Point& y) {
  check_basis_for_kernel(basis, 2 * n - 1);
  const std::vector<double> c = cutoff_coefficients(n);
  const Eigen::VectorXd px = basis.eval(x), py = basis.eval(y);
  double s = 0.0;
  for (int j = 0; j < dim_pi(2 * n - 1, basis.dim); ++j) s += c[basis.block_degree(j)] * px[j] * py[j];
  return {n, basis.weight.mu(), s, KernelMethod::basis_sum};
}

KernelEval Ln_partial(int n, double mu, int axis, const Point& x, const Point& y) {
  if (axis < 0 || axis >= x.dim()) throw std::invalid_argument("Ln_partial: axis out of range");
  return {n, mu, kernel_series_gradient(cutoff_coefficients(n), mu, x, y)[axis],
          KernelMethod::gegenbauer_integral};
}

KernelEval Ln_partial_basis(const OrthoBasis& basis, int n, int axis, const Point& x, const Point& y) {
  check_basis_for_kernel(basis, 2 * n - 1);
  if (axis < 0 || axis >= basis.dim) throw std::invalid_argument("Ln_partial: axis out of range");
  const std::vector<double> c = cutoff_coefficients(n);
  const Eigen::MatrixXd gx = basis.gradient(x.coords());
  const Eigen::VectorXd py = basis.eval(y);
  double s = 0.0;
  for (int j = 0; j < dim_pi(2 * n - 1, basis.dim); ++j) s += c[basis.block_degree(j)] * gx(j, axis) * py[j];
  return {n, basis.weight.mu(), s, KernelMethod::basis_sum};
}

double Ln_partial_L1(int n, double mu, int axis, const Point& fixed, bool first_argument, int rule_degree) {
  if (axis < 0 || axis >= fixed.dim()) throw std::invalid_argument("Ln_partial_L1: axis out of range");
  if (rule_degree <= 0) rule_degree = oversampled_degree(2 * n - 1, 1.0);
  const QuadratureRule rule = ball_rule(rule_degree, mu, fixed.dim());
  const std::vector<double> c = cutoff_coefficients(n);
  double s = 0.0;
  for (size_t q = 0; q < rule.size(); ++q) {
    const Point z = rule.point(q);
    const double g = first_argument ? kernel_series_gradient(c, mu, z, fixed)[axis]
                                    : kernel_series_gradient(c, mu, fixed, z)[axis];
    s += rule.weights[q] * std::abs(g);
  }
  return s;
}

namespace {

int fejer_n1(int n, int m) {
  if (m < 1) throw std::invalid_argument("fejer kernel: m must be >= 1");
  if (n < 2 * m) {
    throw std::invalid_argument("fejer kernel: n = " + std::to_string(n) + " < 2m = " + std::to_string(2 * m) +
                                " leaves n1 = 0");
  }
  return n / (2 * m);
}

// (sin((n1+1/2) theta) / sin(theta/2)) = 1 + 2 sum_{j<=n1} T_j(cos theta), as a function of t = cos theta.
double dirichlet_of_cos(int n1, double t) {
  double s = 1.0, prev = 1.0, cur = t;
  for (int j = 1; j <= n1; ++j) {
    s += 2.0 * cur;
    const double next = 2.0 * t * cur - prev;
    prev = cur;
    cur = next;
  }
  return s;
}

double fejer_of_cos(int n1, int m, double gamma, double t) {
  return gamma * std::pow(dirichlet_of_cos(n1, t), 2 * m);
}

}  // namespace

double fejer_gamma(int n, int m, int ambient_dim) {
  const int n1 = fejer_n1(n, m);
  if (ambient_dim < 2) throw std::invalid_argument("fejer kernel: ambient_dim must be >= 2");
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({n1, m, ambient_dim});
    if (it != cache.end()) return it->second;
  }
  // int_0^pi D^{2m} sin^{a-2} theta d theta = int_{-1}^1 D(t)^{2m} (1-t^2)^{(a-3)/2} dt, exact rule.
  const double e = 0.5 * (ambient_dim - 3);
  const QuadratureRule r = gauss_jacobi_1d(m * n1 + 1, e, e);
  double s = 0.0;
  for (size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(dirichlet_of_cos(n1, r.nodes[q]), 2 * m);
  const double gamma = 1.0 / s;
  std::lock_guard<std::mutex> lock(mu);
  cache[{n1, m, ambient_dim}] = gamma;
  return gamma;
}

double fejer_Tn(int n, int m, double theta, int ambient_dim) {
  const int n1 = fejer_n1(n, m);
  const double gamma = fejer_gamma(n, m, ambient_dim);
  const double half = std::sin(0.5 * theta);
  if (std::abs(half) < 1e-8) return gamma * std::pow(2.0 * n1 + 1.0, 2 * m);
  return gamma * std::pow(std::sin((n1 + 0.5) * theta) / half, 2 * m);
}

SphereFn lift_to_sphere(BallFn f, int dim) {
  return [f = std::move(f), dim](std::span<const double> xbar) {
    if (static_cast<int>(xbar.size()) != dim + 1) throw std::invalid_argument("lift: wrong sphere dimension");
    return f(Point(xbar.first(dim)));
  };
}

BallFn restrict_to_ball(SphereFn g, int dim, int samples) {
  for (const Point& x : ball_grid(dim, std::max(samples, 1))) {
    std::vector<double> up = lift(x), down = up;
    down[dim] = -down[dim];
    const double a = g(up), b = g(down);
    if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) {
      throw std::invalid_argument("restrict_to_ball: function is not even in the last coordinate");
    }
  }
  return [g = std::move(g)](const Point& x) { return g(lift(x)); };
}

double NeedleResult::operator()(const Point& x) const {
  return phi_coeffs.dot(graded_ball_values(x.coords(), n));
}

NeedleResult needle_polynomial(const Point& center, int n, double p, double k, const NeedleOptions& opt) {
  const int d = center.dim();
  if (d < 2) throw std::invalid_argument("needle_polynomial: d must be 2 or 3");
  if (n < 1) throw std::invalid_argument("needle_polynomial: n must be >= 1");
  if (!(p >= 1.0)) throw std::invalid_argument("needle_polynomial: p must be >= 1");
  if (!(k > 0.0)) throw std::invalid_argument("needle_polynomial: decay exponent must be > 0");
  NeedleResult res;
  res.center = center;
  res.n = n;
  res.p = p;
  res.k = k;
  res.m = opt.m_override ? *opt.m_override : static_cast<int>(std::floor(k / p)) + d + 2;
  res.n1 = fejer_n1(n, res.m);
  const int n1 = res.n1, m = res.m;
  const double gamma = fejer_gamma(n, m, d + 1);
  const double area = sphere_area(d);
  const std::vector<double> cbar = lift(center);

  auto convolve = [&](const Point& x, int nodes) {
    const std::vector<double> xbar = lift(x);
    LiftedCapOptions lo;
    lo.nodes_per_panel = nodes;
    for (double s : {1.0, 4.0, 16.0})
      if (s / n < kPi) lo.theta_breaks.push_back(s / n);
    // Integrand on the upper hemisphere: f^{1/p} times T_n at ybar and at its reflection.
    auto F = [&](std::span<const double> ybar, double theta) {
      double t_up = 0.0, t_down = 0.0;
      for (int i = 0; i < d; ++i) t_up += xbar[i] * ybar[i];
      t_down = t_up - xbar[d] * ybar[d];
      t_up += xbar[d] * ybar[d];
      const double f = std::pow(1.0 + n * theta, -k / p);
      return f * (fejer_of_cos(n1, m, gamma, t_up) + fejer_of_cos(n1, m, gamma, t_down));
    };
    return integrate_lifted_cap(center, kPi, F, lo) / area;
  };
  (void)cbar;

  const int nodes = opt.nodes_per_panel > 0 ? opt.nodes_per_panel : std::max(32, n + 24);
  // h has degree 2 m n1 <= n: recover it exactly from values at an exact rule.
  const Weight leb = Weight::jacobi(0.5);
  const QuadratureRule rule = ball_rule(2 * n, 0.5, d);
  const OrthoBasis basis = orthonormal_basis(n, leb, rule);
  const Eigen::MatrixXd P = basis.eval_nodes(rule);
  Eigen::VectorXd hw(rule.size());
  for (size_t q = 0; q < rule.size(); ++q) hw[q] = rule.weights[q] * convolve(rule.point(q), nodes);
  res.phi_coeffs = basis.coeffs.transpose() * (P.transpose() * hw);

  // Resolution check: direct convolution with doubled panels at a few points.
  {
    std::vector<Point> probes{center, Point::origin(d), rule.point(0), rule.point(rule.size() / 2)};
    double worst = 0.0, scale = 0.0;
    for (const Point& x : probes) {
      const double fine = convolve(x, 2 * nodes);
      scale = std::max(scale, std::abs(fine));
      worst = std::max(worst, std::abs(fine - res(x)));
    }
    if (worst > 1e-4 * scale) {
      throw ResolutionError("needle_polynomial: budget doubling changes h by " + std::to_string(worst / scale));
    }
  }

  const int gsize = opt.grid_points > 0 ? opt.grid_points : default_grid_size(d);
  const std::vector<Point> grid = ball_grid(d, gsize);
  res.grid_points = static_cast<int>(grid.size());
  res.c_lo = std::numeric_limits<double>::infinity();
  res.c_hi = 0.0;
  res.min_value = std::numeric_limits<double>::infinity();
  for (const Point& x : grid) {
    const double h = res(x);
    const double f = std::pow(1.0 + n * dist(center, x), -k);
    const double hp = std::pow(std::max(h, 0.0), p);
    res.min_value = std::min(res.min_value, h);
    res.c_lo = std::min(res.c_lo, hp / f);
    res.c_hi = std::max(res.c_hi, hp / f);
  }
  res.center_value = std::pow(std::max(res(center), 0.0), p);
  return res;
}

double maximal_function(const BallFn& f, double beta, int n, const Point& x, std::span<const Point> probes) {
  if (probes.empty()) throw std::invalid_argument("maximal_function: empty probe set");
  if (!(beta > 0.0)) throw std::invalid_argument("maximal_function: beta must be > 0");
  double best = 0.0;
  for (const Point& y : probes) best = std::max(best, std::abs(f(y)) * std::pow(1.0 + n * dist(x, y), -beta));
  return best;
}

JpResult Jp_integral(int n, double mu, double p, double sigma_exp, const Point& x, int nodes_per_panel) {
  check_mu(mu);
  if (n < 1) throw std::invalid_argument("Jp_integral: n must be >= 1");
  if (!(p > 0.0)) throw std::invalid_argument("Jp_integral: p must be > 0");
  const int d = x.dim();
  const double threshold = static_cast<double>(d) / p + 2.0 * mu * std::abs(1.0 / p - 0.5);
  if (!(sigma_exp > threshold)) {
    throw std::invalid_argument("Jp_integral: sigma must exceed d/p + 2 mu |1/p - 1/2| = " +
                                std::to_string(threshold));
  }
  auto integrate = [&](int nodes) {
    LiftedCapOptions lo;
    lo.nodes_per_panel = nodes;
    lo.axial = true;
    for (double s = 1.0; s / n < kPi; s *= 4.0) lo.theta_breaks.push_back(s / n);
    auto F = [&](std::span<const double> ybar, double theta) {
      const double h = ybar[d];
      const double wy = std::pow(h, 2.0 * mu);  // w_mu(y) * ybar_{d+1}
      const double W = std::pow(h + 1.0 / n, 2.0 * mu);
      return wy / (std::pow(W, 0.5 * p) * std::pow(1.0 + n * theta, sigma_exp * p));
    };
    return integrate_lifted_cap(x, kPi, F, lo);
  };
  const int nodes = nodes_per_panel > 0 ? nodes_per_panel : 48;
  JpResult r;
  r.value = integrate(nodes);
  const double fine = integrate(2 * nodes);
  r.budget_change = std::abs(fine - r.value) / std::abs(fine);
  r.ratio = r.value * std::pow(n, d) * std::pow(W_mu(mu, n, x), 0.5 * p - 1.0);
  return r;
}

}  // namespace mball
