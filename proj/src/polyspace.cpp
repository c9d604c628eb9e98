#include "mball/polyspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "mball/errors.hpp"

namespace mball {

namespace {

void check_poly_dim(int d) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("polynomial dimension must be in [1, 3]");
}

// Chebyshev coefficients of x^k, k = 0..n, as rows.
std::vector<std::vector<double>> monomial_to_chebyshev_table(int n) {
  std::vector<std::vector<double>> t(n + 1, std::vector<double>(n + 1, 0.0));
  t[0][0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    for (int m = 0; m < k; ++m) {
      const double c = t[k - 1][m];
      if (c == 0.0) continue;
      if (m == 0) {
        t[k][1] += c;
      } else {
        t[k][m + 1] += 0.5 * c;
        t[k][m - 1] += 0.5 * c;
      }
    }
  }
  return t;
}

// Monomial coefficients of T_k, k = 0..n, as rows.
std::vector<std::vector<double>> chebyshev_to_monomial_table(int n) {
  std::vector<std::vector<double>> t(n + 1, std::vector<double>(n + 1, 0.0));
  t[0][0] = 1.0;
  if (n >= 1) t[1][1] = 1.0;
  for (int k = 1; k < n; ++k) {
    for (int m = 0; m <= k; ++m) t[k + 1][m + 1] += 2.0 * t[k][m];
    for (int m = 0; m < k; ++m) t[k + 1][m] -= t[k - 1][m];
  }
  return t;
}

// Change of basis applied coordinatewise via a 1D table.
std::map<MultiIndex, double> convert(int dim, const std::map<MultiIndex, double>& in,
                                     const std::vector<std::vector<double>>& table) {
  std::map<MultiIndex, double> out;
  for (const auto& [a, c] : in) {
    std::map<MultiIndex, double> partial{{MultiIndex{}, c}};
    for (int i = 0; i < dim; ++i) {
      std::map<MultiIndex, double> next;
      for (const auto& [b, v] : partial) {
        for (int m = 0; m <= a[i]; ++m) {
          const double f = table[a[i]][m];
          if (f == 0.0) continue;
          MultiIndex e = b;
          e[i] = m;
          next[e] += v * f;
        }
      }
      partial.swap(next);
    }
    for (const auto& [b, v] : partial) out[b] += v;
  }
  std::erase_if(out, [](const auto& kv) { return kv.second == 0.0; });
  return out;
}

}  // namespace

int dim_pi(int n, int d) {
  if (n < 0) return 0;
  check_poly_dim(d);
  long long num = 1, den = 1;
  for (int k = 1; k <= d; ++k) {
    num *= n + k;
    den *= k;
  }
  return static_cast<int>(num / den);
}

int total_degree(const MultiIndex& a) noexcept { return a[0] + a[1] + a[2]; }

std::vector<MultiIndex> graded_indices(int n, int d) {
  check_poly_dim(d);
  std::vector<MultiIndex> out;
  out.reserve(dim_pi(n, d));
  for (int k = 0; k <= n; ++k) {
    if (d == 1) {
      out.push_back({k, 0, 0});
    } else if (d == 2) {
      for (int a = k; a >= 0; --a) out.push_back({a, k - a, 0});
    } else {
      for (int a = k; a >= 0; --a)
        for (int b = k - a; b >= 0; --b) out.push_back({a, b, k - a - b});
    }
  }
  return out;
}

int graded_position(const MultiIndex& a, int d) {
  const int k = total_degree(a);
  const int offset = dim_pi(k - 1, d);
  if (d == 1) return offset;
  if (d == 2) return offset + a[1];
  const int r = k - a[0];
  return offset + r * (r + 1) / 2 + (r - a[1]);
}

double jacobi_moment(std::span<const int> alpha, double mu, int d) {
  if (static_cast<int>(alpha.size()) != d) throw std::invalid_argument("jacobi_moment: multi-index length != d");
  if (mu < 0.0) throw std::invalid_argument("jacobi_moment: mu must be >= 0");
  return dirichlet_moment(alpha, {}, mu);
}

Poly::Poly(int dim) : dim_(dim) { check_poly_dim(dim); }

Poly Poly::constant(int dim, double c) {
  Poly p(dim);
  p.add_term(MultiIndex{}, c);
  return p;
}

Poly Poly::coordinate(int dim, int i) {
  Poly p(dim);
  if (i < 0 || i >= dim) throw std::invalid_argument("coordinate axis out of range");
  MultiIndex a{};
  a[i] = 1;
  p.add_term(a, 1.0);
  return p;
}

Poly Poly::from_monomials(int dim, const std::map<MultiIndex, double>& monomials) {
  Poly p(dim);
  int n = 0;
  for (const auto& [a, c] : monomials) {
    for (int i = dim; i < kMaxDim; ++i)
      if (a[i] != 0) throw std::invalid_argument("multi-index exceeds the polynomial dimension");
    n = std::max(n, *std::max_element(a.begin(), a.end()));
  }
  p.terms_ = convert(dim, monomials, monomial_to_chebyshev_table(n));
  return p;
}

Poly Poly::from_graded(int dim, std::span<const double> coeffs) {
  Poly p(dim);
  int n = 0;
  while (dim_pi(n, dim) < static_cast<int>(coeffs.size())) ++n;
  if (dim_pi(n, dim) != static_cast<int>(coeffs.size())) {
    throw std::invalid_argument("graded coefficient vector has a non-graded length");
  }
  const auto idx = graded_indices(n, dim);
  for (size_t k = 0; k < idx.size(); ++k) p.add_term(idx[k], coeffs[k]);
  return p;
}

int Poly::degree() const noexcept {
  int deg = -1;
  for (const auto& [a, c] : terms_) deg = std::max(deg, total_degree(a));
  return deg;
}

double Poly::coeff(const MultiIndex& a) const {
  auto it = terms_.find(a);
  return it == terms_.end() ? 0.0 : it->second;
}

void Poly::add_term(const MultiIndex& a, double c) {
  if (c == 0.0) return;
  for (int i = 0; i < kMaxDim; ++i)
    if (a[i] < 0 || (i >= dim_ && a[i] != 0)) throw std::invalid_argument("invalid multi-index");
  auto [it, inserted] = terms_.emplace(a, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

std::map<MultiIndex, double> Poly::to_monomials() const {
  int n = 0;
  for (const auto& [a, c] : terms_) n = std::max(n, *std::max_element(a.begin(), a.end()));
  return convert(dim_, terms_, chebyshev_to_monomial_table(n));
}

Eigen::VectorXd Poly::to_graded(int n) const {
  if (degree() > n) throw std::invalid_argument("polynomial degree exceeds the requested graded length");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_pi(n, dim_));
  for (const auto& [a, c] : terms_) v[graded_position(a, dim_)] = c;
  return v;
}

void chebyshev_values(double t, int n, std::span<double> out) {
  if (n < 0) return;
  out[0] = 1.0;
  if (n >= 1) out[1] = t;
  for (int k = 1; k < n; ++k) out[k + 1] = 2.0 * t * out[k] - out[k - 1];
}

double Poly::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("evaluation point has wrong dimension");
  int n = 0;
  for (const auto& [a, c] : terms_) n = std::max(n, *std::max_element(a.begin(), a.end()));
  std::vector<double> tv[kMaxDim];
  for (int i = 0; i < dim_; ++i) {
    tv[i].resize(n + 1);
    chebyshev_values(x[i], n, tv[i]);
  }
  double s = 0.0;
  for (const auto& [a, c] : terms_) {
    double v = c;
    for (int i = 0; i < dim_; ++i) v *= tv[i][a[i]];
    s += v;
  }
  return s;
}

Poly& Poly::operator+=(const Poly& o) {
  if (o.dim_ != dim_) throw std::invalid_argument("polynomial dimension mismatch");
  for (const auto& [a, c] : o.terms_) add_term(a, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (o.dim_ != dim_) throw std::invalid_argument("polynomial dimension mismatch");
  for (const auto& [a, c] : o.terms_) add_term(a, -c);
  return *this;
}

Poly& Poly::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [a, c] : terms_) c *= s;
  return *this;
}

Poly operator*(const Poly& p, const Poly& q) {
  if (p.dim() != q.dim()) throw std::invalid_argument("polynomial dimension mismatch");
  const int d = p.dim();
  std::map<MultiIndex, double> acc;
  const double scale = std::ldexp(1.0, -d);
  for (const auto& [a, c] : p.terms()) {
    for (const auto& [b, e] : q.terms()) {
      // T_a T_b = (T_{a+b} + T_{|a-b|}) / 2 in each coordinate.
      for (int mask = 0; mask < (1 << d); ++mask) {
        MultiIndex g{};
        for (int i = 0; i < d; ++i) g[i] = (mask >> i) & 1 ? std::abs(a[i] - b[i]) : a[i] + b[i];
        acc[g] += scale * c * e;
      }
    }
  }
  Poly out(d);
  for (const auto& [g, v] : acc) out.add_term(g, v);
  return out;
}

double Poly::max_coeff_diff(const Poly& o) const {
  Poly diff = *this - o;
  double m = 0.0;
  for (const auto& [a, c] : diff.terms()) m = std::max(m, std::abs(c));
  return m;
}

Poly differentiate(const Poly& p, int i) {
  if (i < 0 || i >= p.dim()) throw std::invalid_argument("differentiate: axis out of range");
  Poly out(p.dim());
  for (const auto& [a, c] : p.terms()) {
    const int k = a[i];
    if (k == 0) continue;
    // T_k' = 2k sum_{j < k, j = k-1 mod 2} T_j, with T_0 counted once.
    for (int j = k - 1; j >= 0; j -= 2) {
      MultiIndex b = a;
      b[i] = j;
      out.add_term(b, (j == 0 ? 1.0 : 2.0) * k * c);
    }
  }
  return out;
}

Poly multiply_coordinate(const Poly& p, int i) {
  if (i < 0 || i >= p.dim()) throw std::invalid_argument("multiply_coordinate: axis out of range");
  Poly out(p.dim());
  for (const auto& [a, c] : p.terms()) {
    MultiIndex up = a;
    up[i] += 1;
    if (a[i] == 0) {
      out.add_term(up, c);
    } else {
      MultiIndex down = a;
      down[i] -= 1;
      out.add_term(up, 0.5 * c);
      out.add_term(down, 0.5 * c);
    }
  }
  return out;
}

Poly apply_Dmu(const Poly& p, double mu) {
  if (mu < 0.0) throw std::invalid_argument("apply_Dmu: mu must be >= 0");
  const int d = p.dim();
  auto euler = [d](const Poly& q) {
    Poly e(d);
    for (int i = 0; i < d; ++i) e += multiply_coordinate(differentiate(q, i), i);
    return e;
  };
  Poly lap(d);
  for (int i = 0; i < d; ++i) lap += differentiate(differentiate(p, i), i);
  const Poly e1 = euler(p);
  return lap - euler(e1) - (2.0 * mu + d - 1.0) * e1;
}

Eigen::VectorXd graded_chebyshev_values(std::span<const double> x, int n) {
  const int d = static_cast<int>(x.size());
  std::vector<double> tv[kMaxDim];
  for (int i = 0; i < d; ++i) {
    tv[i].resize(n + 1);
    chebyshev_values(x[i], n, tv[i]);
  }
  Eigen::VectorXd v(dim_pi(n, d));
  int pos = 0;
  for (int k = 0; k <= n; ++k) {
    if (d == 1) {
      v[pos++] = tv[0][k];
    } else if (d == 2) {
      for (int a = k; a >= 0; --a) v[pos++] = tv[0][a] * tv[1][k - a];
    } else {
      for (int a = k; a >= 0; --a)
        for (int b = k - a; b >= 0; --b) v[pos++] = tv[0][a] * tv[1][b] * tv[2][k - a - b];
    }
  }
  return v;
}

namespace {

// R^{(i)}_k for k = 0..n in rows i, with derivatives when `grad` is set.
struct AxisTables {
  int d, n;
  std::vector<double> r;   // (i, k)
  std::vector<double> dr;  // (i, k, j)
  double val(int i, int k) const { return r[i * (n + 1) + k]; }
  double der(int i, int k, int j) const { return dr[(i * (n + 1) + k) * d + j]; }
};

AxisTables axis_tables(std::span<const double> x, int n, bool grad) {
  const int d = static_cast<int>(x.size());
  AxisTables t{d, n, std::vector<double>(d * (n + 1)), {}};
  if (grad) t.dr.assign(d * (n + 1) * d, 0.0);
  double s = 1.0;
  for (int i = 0; i < d; ++i) {
    double* r = &t.r[i * (n + 1)];
    r[0] = 1.0;
    if (n >= 1) r[1] = x[i];
    for (int k = 1; k < n; ++k) r[k + 1] = 2.0 * x[i] * r[k] - s * r[k - 1];
    if (grad) {
      auto D = [&](int k, int j) -> double& { return t.dr[(i * (n + 1) + k) * d + j]; };
      for (int j = 0; j <= i; ++j) {
        const double ds = j < i ? -2.0 * x[j] : 0.0;
        const double dx = j == i ? 1.0 : 0.0;
        if (n >= 1) D(1, j) = dx;
        for (int k = 1; k < n; ++k) {
          D(k + 1, j) = 2.0 * dx * r[k] + 2.0 * x[i] * D(k, j) - ds * r[k - 1] - s * D(k - 1, j);
        }
      }
    }
    s -= x[i] * x[i];
  }
  return t;
}

}  // namespace

Eigen::VectorXd graded_ball_values(std::span<const double> x, int n) {
  const int d = static_cast<int>(x.size());
  const AxisTables t = axis_tables(x, n, false);
  Eigen::VectorXd v(dim_pi(n, d));
  int pos = 0;
  for (int k = 0; k <= n; ++k) {
    if (d == 1) {
      v[pos++] = t.val(0, k);
    } else if (d == 2) {
      for (int a = k; a >= 0; --a) v[pos++] = t.val(0, a) * t.val(1, k - a);
    } else {
      for (int a = k; a >= 0; --a)
        for (int b = k - a; b >= 0; --b) v[pos++] = t.val(0, a) * t.val(1, b) * t.val(2, k - a - b);
    }
  }
  return v;
}

Eigen::MatrixXd graded_ball_values_and_gradient(std::span<const double> x, int n) {
  const int d = static_cast<int>(x.size());
  const AxisTables t = axis_tables(x, n, true);
  const auto idx = graded_indices(n, d);
  Eigen::MatrixXd out(idx.size(), d + 1);
  for (size_t p = 0; p < idx.size(); ++p) {
    const MultiIndex& a = idx[p];
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= t.val(i, a[i]);
    out(p, 0) = v;
    for (int j = 0; j < d; ++j) {
      // Product rule; factor i depends on x_j only when j <= i.
      double g = 0.0;
      for (int i = j; i < d; ++i) {
        double term = t.der(i, a[i], j);
        if (term == 0.0) continue;
        for (int l = 0; l < d; ++l)
          if (l != i) term *= t.val(l, a[l]);
        g += term;
      }
      out(p, j + 1) = g;
    }
  }
  return out;
}

Poly ball_chebyshev_poly(const MultiIndex& alpha, int d) {
  Poly out = Poly::constant(d, 1.0);
  Poly s = Poly::constant(d, 1.0);
  for (int i = 0; i < d; ++i) {
    const Poly xi = Poly::coordinate(d, i);
    Poly prev = Poly::constant(d, 1.0), cur = xi;
    if (alpha[i] == 0) cur = prev;
    for (int k = 1; k < alpha[i]; ++k) {
      Poly next = 2.0 * multiply_coordinate(cur, i) - s * prev;
      prev = std::move(cur);
      cur = std::move(next);
    }
    out = out * cur;
    s -= xi * xi;
  }
  return out;
}

Poly OrthoBasis::element(int j) const {
  Poly p(dim);
  for (int a = 0; a < size(); ++a)
    if (coeffs(j, a) != 0.0) p += coeffs(j, a) * ball_chebyshev_poly(indices[a], dim);
  return p;
}

int OrthoBasis::block_degree(int j) const {
  int k = 0;
  while (dim_pi(k, dim) <= j) ++k;
  return k;
}

Eigen::VectorXd OrthoBasis::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("basis evaluation: wrong dimension");
  return coeffs * graded_ball_values(x, degree);
}

Eigen::MatrixXd OrthoBasis::gradient(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("basis gradient: wrong dimension");
  return coeffs * graded_ball_values_and_gradient(x, degree).rightCols(dim);
}

Eigen::MatrixXd OrthoBasis::eval_nodes(const QuadratureRule& rule) const {
  if (rule.dim != dim) throw std::invalid_argument("basis evaluation: rule dimension mismatch");
  Eigen::MatrixXd t(rule.size(), size());
  for (size_t q = 0; q < rule.size(); ++q) t.row(q) = graded_ball_values(rule.node(q), degree).transpose();
  return t * coeffs.transpose();
}

Poly OrthoBasis::combine(std::span<const double> a) const {
  if (static_cast<int>(a.size()) != size()) throw std::invalid_argument("coefficient vector has wrong length");
  Eigen::Map<const Eigen::VectorXd> av(a.data(), a.size());
  const Eigen::VectorXd c = coeffs.transpose() * av;
  Poly p(dim);
  for (int k = 0; k < size(); ++k)
    if (c[k] != 0.0) p += c[k] * ball_chebyshev_poly(indices[k], dim);
  return p;
}

OrthoBasis OrthoBasis::truncated(int m) const {
  if (m < 0 || m > degree) throw std::invalid_argument("truncation degree out of range");
  OrthoBasis b = *this;
  const int n = dim_pi(m, dim);
  b.degree = m;
  b.indices.resize(n);
  b.coeffs = coeffs.topLeftCorner(n, n);
  return b;
}

OrthoBasis orthonormal_basis(int n, const Weight& w, const QuadratureRule& rule,
                             std::optional<std::uint64_t> shuffle_seed) {
  if (n < 0) throw std::invalid_argument("orthonormal_basis: n must be >= 0");
  if (rule.domain != RuleDomain::ball || !rule.target || !(*rule.target == w)) {
    throw std::invalid_argument("orthonormal_basis: rule must be a ball rule for weight " + w.to_string());
  }
  if (rule.exactness < 2 * n) {
    throw std::invalid_argument("orthonormal_basis: rule exactness " + std::to_string(rule.exactness) +
                                " < 2n = " + std::to_string(2 * n));
  }
  const int d = rule.dim;
  OrthoBasis basis;
  basis.weight = w;
  basis.dim = d;
  basis.degree = n;
  basis.indices = graded_indices(n, d);
  const int N = basis.size();
  const int M = static_cast<int>(rule.size());

  // Column a of V is sqrt(w_q) T_{indices[a]}(x_q).
  Eigen::MatrixXd V(M, N);
  for (int q = 0; q < M; ++q) {
    V.row(q) = std::sqrt(rule.weights[q]) * graded_ball_values(rule.node(q), n).transpose();
  }

  // Initial column order inside each block.
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle_seed) {
    std::mt19937_64 rng(*shuffle_seed);
    for (int k = 0; k <= n; ++k) {
      const int lo = k == 0 ? 0 : dim_pi(k - 1, d);
      std::shuffle(order.begin() + lo, order.begin() + dim_pi(k, d), rng);
    }
  }

  Eigen::MatrixXd Q(M, N);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(N, N);  // row j: coefficients of element j
  for (int k = 0; k <= n; ++k) {
    const int lo = k == 0 ? 0 : dim_pi(k - 1, d);
    const int hi = dim_pi(k, d);
    const int bs = hi - lo;
    Eigen::MatrixXd B(M, bs);
    Eigen::MatrixXd CB = Eigen::MatrixXd::Zero(N, bs);  // columns: coefficients
    for (int c = 0; c < bs; ++c) {
      const int a = order[lo + c];
      const double nv = V.col(a).norm();
      B.col(c) = V.col(a) / nv;
      CB(a, c) = 1.0 / nv;
    }
    // Project out the lower blocks twice.
    for (int pass = 0; pass < 2 && lo > 0; ++pass) {
      const Eigen::MatrixXd R = Q.leftCols(lo).transpose() * B;
      B.noalias() -= Q.leftCols(lo) * R;
      CB.noalias() -= C.topRows(lo).transpose() * R;
    }
    const Eigen::MatrixXd G = B.transpose() * B;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
    const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    basis.worst_condition = std::max(basis.worst_condition, cond);
    if (!(cond <= kMaxBlockCondition)) throw ConditioningError(k, cond);
    // Modified Gram-Schmidt inside the block with one re-orthogonalization pass.
    for (int c = 0; c < bs; ++c) {
      for (int pass = 0; pass < 2; ++pass) {
        for (int e = 0; e < c; ++e) {
          const double r = B.col(e).dot(B.col(c));
          B.col(c) -= r * B.col(e);
          CB.col(c) -= r * CB.col(e);
        }
        if (pass == 0 && lo > 0) {
          const Eigen::VectorXd R = Q.leftCols(lo).transpose() * B.col(c);
          B.col(c) -= Q.leftCols(lo) * R;
          CB.col(c) -= C.topRows(lo).transpose() * R;
        }
      }
      const double nv = B.col(c).norm();
      B.col(c) /= nv;
      CB.col(c) /= nv;
    }
    Q.middleCols(lo, bs) = B;
    C.middleRows(lo, bs) = CB.transpose();
  }
  // Refinement on the coefficient representation itself: values recomputed
  // from C, then a triangular Cholesky correction. Keeps the degree grading.
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::MatrixXd P = V * C.transpose();
    const Eigen::MatrixXd G = P.transpose() * P;
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success) throw NumericalError("orthonormal_basis: refinement Cholesky failed");
    C = llt.matrixL().solve(C);
  }
  basis.coeffs = C;
  const Eigen::MatrixXd P = V * C.transpose();
  basis.gram_residual = (P.transpose() * P - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff();
  return basis;
}

OrthoBasis orthonormal_basis(int n, const Weight& w, int dim) {
  return orthonormal_basis(n, w, weight_rule(w, std::max(2 * n, 1), dim));
}

namespace {

void check_pair(const OrthoBasis& bn, const OrthoBasis& bm, int axis) {
  if (!(bn.weight == bm.weight) || bn.dim != bm.dim) {
    throw std::invalid_argument("differentiation_matrix: bases differ in weight or dimension");
  }
  if (bn.degree != bm.degree + 1) {
    throw std::invalid_argument("differentiation_matrix: basis degrees must differ by exactly one");
  }
  if (axis < 0 || axis >= bn.dim) throw std::invalid_argument("differentiation_matrix: axis out of range");
}

}  // namespace

DiffMatrix differentiation_matrix(const OrthoBasis& bn, const OrthoBasis& bm, int axis,
                                  const QuadratureRule& rule) {
  check_pair(bn, bm, axis);
  if (rule.exactness < 2 * bn.degree - 1 || !rule.target || !(*rule.target == bn.weight)) {
    throw std::invalid_argument("differentiation_matrix: rule does not integrate the products exactly");
  }
  const int M = static_cast<int>(rule.size());
  Eigen::MatrixXd dphi(M, bn.size()), phi(M, bm.size());
  for (int q = 0; q < M; ++q) {
    const Eigen::MatrixXd vg = graded_ball_values_and_gradient(rule.node(q), bn.degree);
    const double sw = std::sqrt(rule.weights[q]);
    dphi.row(q) = sw * vg.col(axis + 1).transpose();
    phi.row(q) = sw * vg.col(0).head(bm.size()).transpose();
  }
  const Eigen::MatrixXd dv = dphi * bn.coeffs.transpose();
  const Eigen::MatrixXd pv = phi * bm.coeffs.transpose();
  return {axis, pv.transpose() * dv};
}

DiffMatrix differentiation_matrix(const OrthoBasis& bn, const OrthoBasis& bm, int axis) {
  return differentiation_matrix(bn, bm, axis, weight_rule(bn.weight, std::max(2 * bn.degree, 1), bn.dim));
}

DiffMatrix differentiation_matrix_poly(const OrthoBasis& bn, const OrthoBasis& bm, int axis) {
  check_pair(bn, bm, axis);
  const QuadratureRule rule = weight_rule(bn.weight, std::max(2 * bn.degree, 1), bn.dim);
  const int M = static_cast<int>(rule.size());
  const Eigen::MatrixXd pv = bm.eval_nodes(rule);
  Eigen::MatrixXd dv(M, bn.size());
  for (int j = 0; j < bn.size(); ++j) {
    const Poly dp = differentiate(bn.element(j), axis);
    for (int q = 0; q < M; ++q) dv(q, j) = dp(rule.node(q));
  }
  Eigen::Map<const Eigen::VectorXd> w(rule.weights.data(), M);
  return {axis, pv.transpose() * w.asDiagonal() * dv};
}

void write_basis_csv(std::ostream& os, const OrthoBasis& basis) {
  os << "element_index,degree";
  for (int i = 0; i < basis.dim; ++i) os << ",alpha_" << i + 1;
  os << ",coefficient\n";
  os.precision(17);
  for (int j = 0; j < basis.size(); ++j) {
    const int deg = basis.block_degree(j);
    for (int a = 0; a < basis.size(); ++a) {
      const double c = basis.coeffs(j, a);
      if (c == 0.0) continue;
      os << j << ',' << deg;
      for (int i = 0; i < basis.dim; ++i) os << ',' << basis.indices[a][i];
      os << ',' << c << '\n';
    }
  }
}

}  // namespace mball
