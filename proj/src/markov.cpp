#include "mball/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "mball/errors.hpp"
#include "mball/quadrature.hpp"
#include "mball/random.hpp"

namespace mball {

const char* to_string(WorstMethod m) {
  switch (m) {
    case WorstMethod::eigen_exact:
      return "eigen-exact";
    case WorstMethod::irls_ascent:
      return "irls-ascent";
    case WorstMethod::lifted:
      return "lifted";
  }
  return "?";
}

MarkovSetup markov_setup(int n, const Weight& w, int dim) {
  if (n < 0) throw std::invalid_argument("markov_setup: n must be >= 0");
  MarkovSetup s{orthonormal_basis(n, w, dim), {}, {}};
  if (n == 0) {
    s.basis_n_minus_1 = s.basis_n;
    return s;
  }
  s.basis_n_minus_1 = s.basis_n.truncated(n - 1);
  const QuadratureRule rule = weight_rule(w, 2 * n, dim);
  for (int i = 0; i < dim; ++i) s.diff.push_back(differentiation_matrix(s.basis_n, s.basis_n_minus_1, i, rule));
  return s;
}

WorstCaseResult worst_l2(const OrthoBasis& bn, const OrthoBasis& bm, std::span<const DiffMatrix> diff) {
  WorstCaseResult r;
  r.n = bn.degree;
  r.p = 2.0;
  r.weight = bn.weight;
  r.method = WorstMethod::eigen_exact;
  if (bn.degree == 0) {
    r.extremal = Eigen::VectorXd::Unit(1, 0);
    return r;
  }
  if (static_cast<int>(diff.size()) != bn.dim) throw std::invalid_argument("worst_l2: need one matrix per axis");
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(bn.size(), bn.size());
  for (const DiffMatrix& D : diff) {
    if (D.matrix.rows() != bm.size() || D.matrix.cols() != bn.size()) {
      throw std::invalid_argument("worst_l2: differentiation matrix does not match the bases");
    }
    S.noalias() += D.matrix.transpose() * D.matrix;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) {
    throw NumericalError("worst_l2: eigensolver failed (matrix size " + std::to_string(S.rows()) + ")");
  }
  r.value = std::sqrt(std::max(0.0, es.eigenvalues()(S.rows() - 1)));
  r.extremal = es.eigenvectors().col(S.rows() - 1);
  return r;
}

WorstCaseResult worst_l2(const MarkovSetup& s) { return worst_l2(s.basis_n, s.basis_n_minus_1, s.diff); }

namespace {

// Ratio (int F(grad)^p / int |f|^p)^(1/p) over a fixed rule, with the gradient
// of its logarithm in coefficient space.
struct LpRatio {
  double p;
  Eigen::VectorXd w;
  Eigen::MatrixXd V;
  std::vector<Eigen::MatrixXd> G;

  double value(const Eigen::VectorXd& a) const {
    const Eigen::VectorXd v = V * a;
    Eigen::VectorXd g2 = Eigen::VectorXd::Zero(v.size());
    for (const auto& Gi : G) g2 += (Gi * a).cwiseAbs2();
    double num = 0.0, den = 0.0;
    for (Eigen::Index q = 0; q < v.size(); ++q) {
      num += w[q] * std::pow(g2[q], 0.5 * p);
      den += w[q] * std::pow(std::abs(v[q]), p);
    }
    return std::pow(num / den, 1.0 / p);
  }

  Eigen::VectorXd log_gradient(const Eigen::VectorXd& a) const {
    const Eigen::VectorXd v = V * a;
    std::vector<Eigen::VectorXd> g;
    Eigen::VectorXd g2 = Eigen::VectorXd::Zero(v.size());
    for (const auto& Gi : G) {
      g.push_back(Gi * a);
      g2 += g.back().cwiseAbs2();
    }
    double num = 0.0, den = 0.0;
    for (Eigen::Index q = 0; q < v.size(); ++q) {
      num += w[q] * std::pow(g2[q], 0.5 * p);
      den += w[q] * std::pow(std::abs(v[q]), p);
    }
    Eigen::VectorXd cv(v.size()), cg(v.size());
    for (Eigen::Index q = 0; q < v.size(); ++q) {
      cv[q] = w[q] * (v[q] == 0.0 ? 0.0 : std::pow(std::abs(v[q]), p - 2.0) * v[q]) / den;
      cg[q] = g2[q] > 0.0 ? w[q] * std::pow(g2[q], 0.5 * p - 1.0) / num : 0.0;
    }
    Eigen::VectorXd out = -V.transpose() * cv;
    for (size_t i = 0; i < G.size(); ++i) out += G[i].transpose() * cg.cwiseProduct(g[i]);
    return out;
  }
};

// Projected gradient ascent on the unit sphere with an adaptive step.
double ascend(const LpRatio& f, Eigen::VectorXd& a, int max_iterations) {
  a.normalize();
  double val = f.value(a);
  double step = 0.1;
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd g = f.log_gradient(a);
    g -= g.dot(a) * a;
    const double gn = g.norm();
    if (!(gn > 1e-14)) break;
    bool improved = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::VectorXd cand = (a + (step / gn) * g).normalized();
      const double cv = f.value(cand);
      if (std::isfinite(cv) && cv > val) {
        const double gain = (cv - val) / val;
        a = cand;
        val = cv;
        step *= 1.5;
        improved = true;
        if (gain < 1e-13) it = max_iterations;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return val;
}

}  // namespace

WorstCaseResult worst_lp(int n, double p, const Weight& w, int dim, const WorstLpOptions& opt) {
  if (!(p >= 1.0)) throw std::invalid_argument("worst_lp: p must be >= 1");
  if (n < 1) throw std::invalid_argument("worst_lp: n must be >= 1");
  const MarkovSetup s = markov_setup(n, w, dim);
  const OrthoBasis& basis = s.basis_n;
  const int N = basis.size();
  const QuadratureRule rule = weight_rule(w, oversampled_degree(n, p), dim);
  const int M = static_cast<int>(rule.size());
  LpRatio f{p, Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), M), basis.eval_nodes(rule), {}};
  for (int i = 0; i < dim; ++i) f.G.emplace_back(M, N);
  for (int q = 0; q < M; ++q) {
    const Eigen::MatrixXd gq = basis.gradient(rule.node(q));
    for (int i = 0; i < dim; ++i) f.G[i].row(q) = gq.col(i).transpose();
  }

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(worst_l2(s).extremal);
  double lifted_value = -1.0;
  if (w.kind() == Weight::Kind::jacobi) {
    const double lambda = w.mu() + 0.5 * (dim - 1);
    const Worst1DResult one = worst_1d_detail(n, p, lambda, opt.seed);
    lifted_value = one.value;
    const Jacobi1D J = jacobi_1d(n, lambda);
    const QuadratureRule exact = weight_rule(w, 2 * n, dim);
    const Eigen::MatrixXd P = basis.eval_nodes(exact);
    Eigen::VectorXd fv(exact.size());
    for (size_t q = 0; q < exact.size(); ++q) {
      fv[q] = exact.weights[q] * J.eval(exact.node(q)[0]).col(0).dot(one.extremal);
    }
    starts.push_back(P.transpose() * fv);
  }
  for (int r = 0; r < opt.restarts; ++r) {
    Eigen::VectorXd a(N);
    for (int j = 0; j < N; ++j) a[j] = counter_gaussian(opt.seed, r, j);
    starts.push_back(a);
  }

  WorstCaseResult res;
  res.n = n;
  res.p = p;
  res.weight = w;
  res.method = WorstMethod::irls_ascent;
  res.value = -1.0;
  for (auto a : starts) {
    if (a.norm() == 0.0) continue;
    const double v = ascend(f, a, opt.max_iterations);
    if (v > res.value) {
      res.value = v;
      res.extremal = a;
    }
  }
  if (lifted_value > res.value) {
    res.value = lifted_value;
    res.method = WorstMethod::lifted;
    res.extremal = starts[1].normalized();
  }
  return res;
}

Eigen::MatrixXd Jacobi1D::eval(double t) const {
  Eigen::MatrixXd out(degree + 1, 2);
  double qm = 0.0, dqm = 0.0;
  double q = 1.0 / b[0], dq = 0.0;
  out(0, 0) = q;
  out(0, 1) = 0.0;
  for (int k = 0; k < degree; ++k) {
    const double qn = ((t - a[k]) * q - b[k] * qm) / b[k + 1];
    const double dqn = ((t - a[k]) * dq + q - b[k] * dqm) / b[k + 1];
    qm = q;
    dqm = dq;
    q = qn;
    dq = dqn;
    out(k + 1, 0) = q;
    out(k + 1, 1) = dq;
  }
  return out;
}

Jacobi1D jacobi_1d(int n, double lambda) {
  if (n < 0) throw std::invalid_argument("jacobi_1d: n must be >= 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("jacobi_1d: lambda must be >= 0");
  const double e = lambda - 0.5;
  const QuadratureRule r = gauss_jacobi_1d(n + 2, e, e);
  const int m = static_cast<int>(r.size());
  Jacobi1D J;
  J.lambda = lambda;
  J.degree = n;
  J.a.assign(n, 0.0);
  J.b.assign(n + 1, 0.0);
  double mass = 0.0;
  for (double wq : r.weights) mass += wq;
  J.b[0] = std::sqrt(mass);
  std::vector<double> qm(m, 0.0), q(m, 1.0 / J.b[0]), next(m);
  for (int k = 0; k < n; ++k) {
    double ak = 0.0;
    for (int i = 0; i < m; ++i) ak += r.weights[i] * r.nodes[i] * q[i] * q[i];
    J.a[k] = ak;
    double nrm = 0.0;
    for (int i = 0; i < m; ++i) {
      next[i] = (r.nodes[i] - ak) * q[i] - (k == 0 ? 0.0 : J.b[k]) * qm[i];
      nrm += r.weights[i] * next[i] * next[i];
    }
    J.b[k + 1] = std::sqrt(nrm);
    for (int i = 0; i < m; ++i) {
      qm[i] = q[i];
      q[i] = next[i] / J.b[k + 1];
    }
  }
  // b[0] enters the recurrence only through q_0; the k = 0 step has no q_{-1}.
  return J;
}

double univariate_lp_power(const Jacobi1D& J, std::span<const double> coeffs, double p, bool derivative) {
  const Eigen::Map<const Eigen::VectorXd> c(coeffs.data(), coeffs.size());
  const int col = derivative ? 1 : 0;
  auto g = [&](double t) { return J.eval(t).col(col).dot(c); };
  const int grid = 40 * (J.degree + 1);
  std::vector<double> breaks;
  double t0 = -1.0, g0 = g(t0);
  for (int i = 1; i <= grid; ++i) {
    const double t1 = -std::cos(std::numbers::pi * i / grid);
    const double g1 = g(t1);
    if ((g0 < 0.0 && g1 > 0.0) || (g0 > 0.0 && g1 < 0.0)) {
      double lo = t0, hi = t1, glo = g0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm < 0.0) == (glo < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      breaks.push_back(0.5 * (lo + hi));
    }
    t0 = t1;
    g0 = g1;
  }
  return integrate_interval_split([&](double t) { return std::pow(std::abs(g(t)), p); }, J.lambda - 0.5, breaks,
                                  J.degree + 24);
}

Worst1DResult worst_1d_detail(int n, double p, double lambda, std::uint64_t seed) {
  if (!(p >= 1.0)) throw std::invalid_argument("worst_1d: p must be >= 1");
  if (n < 0) throw std::invalid_argument("worst_1d: n must be >= 0");
  Worst1DResult res;
  if (n == 0) {
    res.extremal = Eigen::VectorXd::Unit(1, 0);
    return res;
  }
  const Jacobi1D J = jacobi_1d(n, lambda);
  const double e = lambda - 0.5;
  // D(k, j) = <q_j', q_k>, exact with n + 1 nodes.
  const QuadratureRule r = gauss_jacobi_1d(n + 1, e, e);
  Eigen::MatrixXd Q(r.size(), n + 1), dQ(r.size(), n + 1);
  for (size_t i = 0; i < r.size(); ++i) {
    const Eigen::MatrixXd v = J.eval(r.nodes[i]);
    Q.row(i) = std::sqrt(r.weights[i]) * v.col(0).transpose();
    dQ.row(i) = std::sqrt(r.weights[i]) * v.col(1).transpose();
  }
  const Eigen::MatrixXd D = Q.leftCols(n).transpose() * dQ;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D.transpose() * D);
  const Eigen::VectorXd top = es.eigenvectors().col(n);
  if (p == 2.0) {
    res.value = std::sqrt(std::max(0.0, es.eigenvalues()(n)));
    res.extremal = top;
    return res;
  }
  const QuadratureRule fine = gauss_jacobi_1d(4 * n + 40, e, e);
  const int M = static_cast<int>(fine.size());
  LpRatio f{p, Eigen::Map<const Eigen::VectorXd>(fine.weights.data(), M), Eigen::MatrixXd(M, n + 1), {}};
  f.G.emplace_back(M, n + 1);
  for (int i = 0; i < M; ++i) {
    const Eigen::MatrixXd v = J.eval(fine.nodes[i]);
    f.V.row(i) = v.col(0).transpose();
    f.G[0].row(i) = v.col(1).transpose();
  }
  std::vector<Eigen::VectorXd> starts{top};
  for (int s = 0; s < 3; ++s) {
    Eigen::VectorXd a(n + 1);
    for (int j = 0; j <= n; ++j) a[j] = counter_gaussian(seed, s, j);
    starts.push_back(a);
  }
  // Endpoint-concentrated candidates: K_n(t, 1) and K_{n/2}(t, 1)^2.
  {
    const Eigen::MatrixXd at_one = J.eval(1.0);
    starts.push_back(at_one.col(0));
    const int h = n / 2;
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(n + 1);
    for (int i = 0; i < M; ++i) {
      const double k = f.V.row(i).head(h + 1).dot(at_one.col(0).head(h + 1));
      sq += fine.weights[i] * k * k * f.V.row(i).transpose();
    }
    starts.push_back(sq);
  }
  // Continuation in the exponent from the p = 2 extremal.
  {
    Eigen::VectorXd a = top;
    LpRatio g = f;
    for (int k = 1; k <= 8; ++k) {
      g.p = 2.0 + (p - 2.0) * k / 8.0;
      ascend(g, a, 4000);
    }
    starts.push_back(a);
  }
  double best = -1.0;
  for (auto a : starts) {
    ascend(f, a, 4000);
    const double num = univariate_lp_power(J, std::span<const double>(a.data(), a.size()), p, true);
    const double den = univariate_lp_power(J, std::span<const double>(a.data(), a.size()), p, false);
    const double v = std::pow(num / den, 1.0 / p);
    if (v > best) {
      best = v;
      res.extremal = a;
    }
  }
  res.value = best;
  return res;
}

double worst_1d(int n, double p, double lambda) { return worst_1d_detail(n, p, lambda).value; }

LiftedResult lifted_lower_bound(int n, double p, double mu, int d, std::uint64_t seed) {
  if (d != 2 && d != 3) throw std::invalid_argument("lifted_lower_bound: d must be 2 or 3");
  if (!(mu >= 0.0)) throw std::invalid_argument("lifted_lower_bound: mu must be >= 0");
  const double lambda = mu + 0.5 * (d - 1);
  LiftedResult res;
  res.value = worst_1d(n, p, lambda);

  const bool even = p == std::round(p) && static_cast<long>(p) % 2 == 0;
  const double q = even ? p : 2.0;
  res.identity_exponent = q;
  const int deg = std::max(1, static_cast<int>(q) * n);
  const Jacobi1D J = jacobi_1d(n, lambda);
  const QuadratureRule ball = ball_rule(deg, mu, d);
  const QuadratureRule line = gauss_jacobi_1d(deg / 2 + 1, lambda - 0.5, lambda - 0.5);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int s = 0; s < 3; ++s) {
    Eigen::VectorXd c(n + 1);
    for (int j = 0; j <= n; ++j) c[j] = counter_gaussian(seed + 7, s, j);
    double num = 0.0, den = 0.0;
    for (size_t k = 0; k < ball.size(); ++k) {
      num += ball.weights[k] * std::pow(std::abs(J.eval(ball.node(k)[0]).col(0).dot(c)), q);
    }
    for (size_t k = 0; k < line.size(); ++k) {
      den += line.weights[k] * std::pow(std::abs(J.eval(line.nodes[k]).col(0).dot(c)), q);
    }
    lo = std::min(lo, num / den);
    hi = std::max(hi, num / den);
  }
  res.identity_constant = 0.5 * (lo + hi);
  res.identity_spread = hi / lo - 1.0;
  if (res.identity_spread > 1e-7) {
    throw ConsistencyError("lifted_lower_bound: lifting constant depends on f (spread " +
                           std::to_string(res.identity_spread) + ")");
  }
  return res;
}

TraceResult trace_formula(const MarkovSetup& s) {
  const OrthoBasis& bn = s.basis_n;
  const int n = bn.degree, d = bn.dim;
  if (n < 1) throw std::invalid_argument("trace_formula: n must be >= 1");
  TraceResult r;
  const QuadratureRule rule = weight_rule(bn.weight, 2 * n + 1, d);
  std::vector<double> sums(d, 0.0);
  for (size_t q = 0; q < rule.size(); ++q) {
    const Eigen::MatrixXd g = bn.gradient(rule.node(q));
    for (int i = 0; i < d; ++i) sums[i] += rule.weights[q] * g.col(i).squaredNorm();
  }
  double total = 0.0;
  for (int i = 0; i < d; ++i) {
    const double tr = s.diff[i].matrix.squaredNorm();
    r.matrix_trace.push_back(tr);
    r.norm_sum.push_back(sums[i]);
    r.max_relative_gap = std::max(r.max_relative_gap, std::abs(tr - sums[i]) / std::max(tr, sums[i]));
    total += std::sqrt(tr);
  }
  if (r.max_relative_gap > 1e-8) {
    throw ConsistencyError("trace_formula: matrix trace and norm sum differ by " +
                           std::to_string(r.max_relative_gap));
  }
  r.value = std::pow(n, -0.5 * d) * total;
  return r;
}

AverageCaseResult average_monte_carlo(const MarkovSetup& s, double sigma, int samples, std::uint64_t seed,
                                      int threads) {
  if (!(sigma > 0.0)) throw std::invalid_argument("average_monte_carlo: sigma must be > 0");
  if (samples < 100) throw std::invalid_argument("average_monte_carlo: samples must be >= 100");
  const int N = s.basis_n.size();
  std::vector<double> vals(samples);
  auto work = [&](int begin, int end) {
    Eigen::VectorXd a(N);
    for (int k = begin; k < end; ++k) {
      for (int j = 0; j < N; ++j) a[j] = sigma * counter_gaussian(seed, k, j);
      double g2 = 0.0;
      for (const DiffMatrix& D : s.diff) g2 += (D.matrix * a).squaredNorm();
      vals[k] = std::sqrt(g2) / a.norm();
    }
  };
  threads = std::clamp(threads, 1, samples);
  if (threads == 1) {
    work(0, samples);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back(work, static_cast<int>(static_cast<long>(samples) * t / threads),
                        static_cast<int>(static_cast<long>(samples) * (t + 1) / threads));
    }
    for (auto& th : pool) th.join();
  }
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= samples;
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= (samples - 1);
  AverageCaseResult r;
  r.n = s.basis_n.degree;
  r.weight = s.basis_n.weight;
  r.sigma = sigma;
  r.sample_count = samples;
  r.monte_carlo_mean = mean;
  r.monte_carlo_stderr = std::sqrt(var / samples);
  r.trace_formula_value = trace_formula(s).value;
  return r;
}

ExponentFit exponent_fit(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw std::invalid_argument("exponent_fit: need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(points.size());
  for (const auto& [n, v] : points) {
    if (!(n > 0.0) || !(v > 0.0)) throw std::invalid_argument("exponent_fit: n and values must be > 0");
    const double x = std::log(n), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = m * sxx - sx * sx;
  if (!(den > 0.0)) throw std::invalid_argument("exponent_fit: need at least two distinct n");
  ExponentFit f;
  f.slope = (m * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / m;
  for (const auto& [n, v] : points) {
    f.max_residual = std::max(f.max_residual, std::abs(std::log(v) - f.intercept - f.slope * std::log(n)));
  }
  return f;
}

void write_markov_csv_header(std::ostream& os) { os << "n,p,weight,method,value,stderr\n"; }

}  // namespace mball
