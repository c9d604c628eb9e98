#pragma once

// Brute-force references built from closed-form monomial moments. Nothing here
// touches the library's bases or rules.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// int_{B^d} x^a (1-|x|^2)^(mu-1/2) dx; zero unless every a_i is even.
inline double jacobi_moment(const std::vector<int>& a, double mu) {
  double log_num = std::lgamma(mu + 0.5);
  int total = 0;
  for (int ai : a) {
    if (ai % 2) return 0.0;
    log_num += std::lgamma((ai + 1) / 2.0);
    total += ai;
  }
  const double d = static_cast<double>(a.size());
  return std::exp(log_num - std::lgamma(total / 2.0 + d / 2.0 + mu + 0.5));
}

/// Exponents of total degree <= n in d = 2 or 3 variables.
inline std::vector<std::vector<int>> monomials(int n, int d) {
  std::vector<std::vector<int>> out;
  if (d == 2) {
    for (int k = 0; k <= n; ++k)
      for (int i = k; i >= 0; --i) out.push_back({i, k - i});
  } else {
    for (int k = 0; k <= n; ++k)
      for (int i = k; i >= 0; --i)
        for (int j = k - i; j >= 0; --j) out.push_back({i, j, k - i - j});
  }
  return out;
}

inline std::vector<int> add(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

/// Gram matrix of the monomials against w_mu.
inline Eigen::MatrixXd gram(int n, int d, double mu) {
  const auto m = monomials(n, d);
  Eigen::MatrixXd G(m.size(), m.size());
  for (size_t i = 0; i < m.size(); ++i)
    for (size_t j = 0; j < m.size(); ++j) G(i, j) = jacobi_moment(add(m[i], m[j]), mu);
  return G;
}

/// sum_i <d_i x^a, d_i x^b> against w_mu.
inline Eigen::MatrixXd gradient_gram(int n, int d, double mu) {
  const auto m = monomials(n, d);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m.size(), m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    for (size_t j = 0; j < m.size(); ++j) {
      for (int ax = 0; ax < d; ++ax) {
        if (m[i][ax] == 0 || m[j][ax] == 0) continue;
        std::vector<int> e = add(m[i], m[j]);
        e[ax] -= 2;
        H(i, j) += m[i][ax] * m[j][ax] * jacobi_moment(e, mu);
      }
    }
  }
  return H;
}

/// sup ||grad P||_2 / ||P||_2 over Pi_n^d for w_mu, from the generalized
/// eigenproblem H v = lambda G v on monomials.
inline double worst_l2(int n, int d, double mu) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(gradient_gram(n, d, mu), gram(n, d, mu));
  return std::sqrt(es.eigenvalues().maxCoeff());
}

/// Monomial values at x.
inline Eigen::VectorXd monomial_values(int n, const std::vector<double>& x) {
  const auto m = monomials(n, static_cast<int>(x.size()));
  Eigen::VectorXd v(m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    double p = 1.0;
    for (size_t ax = 0; ax < x.size(); ++ax) p *= std::pow(x[ax], m[i][ax]);
    v[i] = p;
  }
  return v;
}

/// Lambda_{n,2}(x) = 1 / (v^T G^{-1} v).
inline double christoffel(int n, double mu, const std::vector<double>& x) {
  const Eigen::MatrixXd G = gram(n, static_cast<int>(x.size()), mu);
  const Eigen::VectorXd v = monomial_values(n, x);
  return 1.0 / v.dot(G.ldlt().solve(v));
}

/// Composite Simpson rule on [a, b] with 2m panels.
template <class F>
double simpson(F f, double a, double b, int m = 2000) {
  const double h = (b - a) / (2 * m);
  double s = f(a) + f(b);
  for (int i = 1; i < 2 * m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace oracle
