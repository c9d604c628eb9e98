#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mball/polyspace.hpp"
#include "mball/weights.hpp"

namespace mball {

enum class WorstMethod { eigen_exact, irls_ascent, lifted };
const char* to_string(WorstMethod m);

struct WorstCaseResult {
  int n = 0;
  double p = 2.0;
  Weight weight = Weight::jacobi(0.5);
  double value = 0.0;
  WorstMethod method = WorstMethod::eigen_exact;
  /// Extremal coefficient vector in the orthonormal basis (may be empty).
  Eigen::VectorXd extremal;
};

/// Orthonormal bases of degree n and n-1 (the second is a truncation of the
/// first) with the differentiation matrices D_i for every axis.
struct MarkovSetup {
  OrthoBasis basis_n;
  OrthoBasis basis_n_minus_1;
  std::vector<DiffMatrix> diff;
};
MarkovSetup markov_setup(int n, const Weight& w, int dim);

/// sqrt(lambda_max(sum_i D_i^T D_i)); extremal = top eigenvector.
WorstCaseResult worst_l2(const OrthoBasis& basis_n, const OrthoBasis& basis_n_minus_1,
                         std::span<const DiffMatrix> diff);
WorstCaseResult worst_l2(const MarkovSetup& s);

struct WorstLpOptions {
  int restarts = 4;
  std::uint64_t seed = 1;
  int max_iterations = 300;
};

/// Lower bound for sup ||grad P||_{p,w} / ||P||_{p,w} over Pi_n^d by projected
/// gradient ascent on the unit coefficient sphere. Starts: the p = 2
/// eigenvector, `restarts` Gaussian directions and, for jacobi weights, the
/// univariate extremal of the lifted problem placed along x_1, whose ratio
/// equals the one-variable value exactly and is included as computed there.
WorstCaseResult worst_lp(int n, double p, const Weight& w, int dim, const WorstLpOptions& opt = {});

/// Orthonormal polynomials for (1-t^2)^(lambda-1/2) on [-1,1] from the
/// discretized Stieltjes procedure; a[k], b[k] are the recurrence coefficients
///   b[k+1] q_{k+1} = (t - a[k]) q_k - b[k] q_{k-1},  q_0 = 1/sqrt(b[0]^2).
struct Jacobi1D {
  double lambda = 0.5;
  int degree = 0;
  std::vector<double> a;
  std::vector<double> b;
  /// Values (column 0) and derivatives (column 1) of q_0..q_degree at t.
  Eigen::MatrixXd eval(double t) const;
};
Jacobi1D jacobi_1d(int n, double lambda);

struct Worst1DResult {
  double value = 0.0;
  /// Extremal coefficients over Jacobi1D.
  Eigen::VectorXd extremal;
};

/// sup ||f'||_{p,w_lambda} / ||f||_{p,w_lambda} over f in Pi_n^1 with
/// w_lambda = (1-t^2)^(lambda-1/2); exact at p = 2, ascent lower bound
/// otherwise with the final ratio integrated panelwise between the roots.
Worst1DResult worst_1d_detail(int n, double p, double lambda, std::uint64_t seed = 1);
double worst_1d(int n, double p, double lambda);

/// ||f||_{p,w_lambda}^p with panels split at the sign changes of f.
double univariate_lp_power(const Jacobi1D& J, std::span<const double> coeffs, double p, bool derivative);

struct LiftedResult {
  double value = 0.0;
  /// c_{mu,d} measured on random f and its spread (max/min - 1).
  double identity_constant = 0.0;
  double identity_spread = 0.0;
  /// Exponent used in the identity check: p for even integer p, else 2.
  double identity_exponent = 2.0;
};

/// worst_1d(n, p, mu + (d-1)/2), after checking that
///   int_B |f(x_1)|^q w_mu(x) dx / int |f|^q w_lambda
/// does not depend on f (1e-7 relative), ConsistencyError otherwise.
LiftedResult lifted_lower_bound(int n, double p, double mu, int d, std::uint64_t seed = 1);

struct TraceResult {
  double value = 0.0;
  /// tr(D_i^T D_i) from the matrices and sum_j ||d_i P_j||^2 by quadrature.
  std::vector<double> matrix_trace;
  std::vector<double> norm_sum;
  double max_relative_gap = 0.0;
};

/// n^{-d/2} sum_i sqrt(tr(D_i^T D_i)); throws ConsistencyError when the two
/// trace computations differ by more than 1e-8 relative.
TraceResult trace_formula(const MarkovSetup& s);

struct AverageCaseResult {
  int n = 0;
  Weight weight = Weight::jacobi(0.5);
  double sigma = 1.0;
  int sample_count = 0;
  double monte_carlo_mean = 0.0;
  double monte_carlo_stderr = 0.0;
  double trace_formula_value = 0.0;
};

/// Mean of sqrt(sum_i |D_i a|^2) / |a| over a ~ N(0, sigma^2 I). Draw k uses the
/// counter stream (seed, k); draws are split across `threads` workers by index
/// range and reduced in index order.
AverageCaseResult average_monte_carlo(const MarkovSetup& s, double sigma, int samples, std::uint64_t seed,
                                      int threads = 1);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

/// Least-squares line through (log n, log value).
ExponentFit exponent_fit(std::span<const std::pair<double, double>> points);

/// CSV header `n,p,weight,method,value,stderr`.
void write_markov_csv_header(std::ostream& os);

}  // namespace mball
