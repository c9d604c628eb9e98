#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mball/geometry.hpp"
#include "mball/polyspace.hpp"
#include "mball/weights.hpp"

namespace mball {

/// C_n^lambda(t) by the three-term recurrence. Throws for lambda <= 0 or
/// |t| > 1 + 1e-12.
double gegenbauer(int n, double lambda, double t);
/// C_0..C_n at t (no range check); out.size() >= n + 1.
void gegenbauer_all(int n, double lambda, double t, std::span<double> out);

/// lambda = mu + (d-1)/2.
double kernel_lambda(double mu, int d);
/// b_d^mu = 1 / int_B w_mu.
double ball_normalizer(double mu, int d);
/// b_1^{mu-1/2} = 1 / int_{-1}^1 (1-u^2)^{mu-1} du, mu > 0.
double interval_normalizer(double mu);

/// Smooth cutoff: 1 on [0,1], 0 on [2,inf), s(2-t)/(s(2-t)+s(t-1)) between,
/// s(u) = exp(-1/u).
double cutoff_eta(double t);

enum class KernelMethod { gegenbauer_integral, basis_sum };
const char* to_string(KernelMethod m);

struct KernelEval {
  int n = 0;
  double mu = 0.0;
  double value = 0.0;
  KernelMethod method = KernelMethod::gegenbauer_integral;
};

/// Sum_j c_j P_j(w_mu; x, y) for j = 0..coeffs.size()-1 from the Gegenbauer
/// integral representation (two-term formula at mu = 0).
double kernel_series(std::span<const double> coeffs, double mu, const Point& x, const Point& y);
/// Gradient in x of the same series, for every axis. Uses the integrated-by-parts
/// form  y_i int C'(a+ub) dnu - x_i (1-|y|^2) (b_1/(2 mu)) int C''(a+ub)(1-u^2)^mu du,
/// which is regular up to |x| = 1.
Eigen::VectorXd kernel_series_gradient(std::span<const double> coeffs, double mu, const Point& x,
                                       const Point& y);

/// P_n(w_mu; x, y).
KernelEval reproducing_kernel(int n, double mu, const Point& x, const Point& y);
/// Degree-n block sum of an orthonormal basis of jacobi(mu).
KernelEval reproducing_kernel_basis(const OrthoBasis& basis, int n, const Point& x, const Point& y);

/// eta(j/n) for j = 0..2n-1.
std::vector<double> cutoff_coefficients(int n);

/// L_n(w_mu; x, y) = sum_{j<2n} eta(j/n) P_j(w_mu; x, y).
KernelEval Ln_kernel(int n, double mu, const Point& x, const Point& y);
/// Same sum over the blocks of an orthonormal basis of degree >= 2n-1.
KernelEval Ln_kernel_basis(const OrthoBasis& basis, int n, const Point& x, const Point& y);

/// d/dx_i L_n(w_mu; x, y), 0-based axis.
KernelEval Ln_partial(int n, double mu, int axis, const Point& x, const Point& y);
/// Same from the basis: sum_j eta(deg_j/n) d_i P_j(x) P_j(y).
KernelEval Ln_partial_basis(const OrthoBasis& basis, int n, int axis, const Point& x, const Point& y);

/// int_B |d/dx_i L_n(w_mu; x, y)| w_mu(x) dx (y fixed, `first_argument` true),
/// or int_B |d/dx_i L_n(w_mu; x, y)| w_mu(y) dy (x fixed, false).
double Ln_partial_L1(int n, double mu, int axis, const Point& fixed, bool first_argument = true,
                     int rule_degree = 0);

/// W_mu(n; x) = (sqrt(1-|x|^2) + 1/n)^(2 mu); same as cal_W.
inline double W_mu(double mu, int n, const Point& x) { return cal_W(mu, n, x); }

/// gamma_n(cos theta)-normalized Fejer-type kernel
///   T_n(cos theta) = gamma_n (sin((n1+1/2) theta) / sin(theta/2))^(2m),
///   n1 = floor(n / (2m)),  int_0^pi T_n sin^{dim-2}(theta) d theta = 1,
/// on the sphere S^{ambient_dim-1}.
double fejer_Tn(int n, int m, double theta, int ambient_dim);
double fejer_gamma(int n, int m, int ambient_dim);

using BallFn = std::function<double(const Point&)>;
using SphereFn = std::function<double(std::span<const double>)>;

/// T(f)(xbar) = f(x).
SphereFn lift_to_sphere(BallFn f, int dim);
/// g restricted to the upper hemisphere, pulled back to the ball. Checks
/// g(xbar) = g(tau xbar) within 1e-9 on `samples` deterministic points and
/// throws std::invalid_argument otherwise.
BallFn restrict_to_ball(SphereFn g, int dim, int samples = 64);

struct NeedleResult {
  Point center;
  int n = 0;
  double p = 1.0;
  double k = 0.0;
  int m = 0;
  int n1 = 0;
  /// Ball polynomial h in the Phi family (see graded_ball_values), degree n.
  Eigen::VectorXd phi_coeffs;
  double c_lo = 0.0;  // min over the grid of h^p / f
  double c_hi = 0.0;  // max over the grid of h^p / f
  double min_value = 0.0;  // min of h over the grid
  double center_value = 0.0;  // h(center)^p
  int grid_points = 0;

  double operator()(const Point& x) const;
  /// max(h^p/f) and max(f/h^p) over the grid.
  double window_upper() const { return c_hi; }
  double window_lower() const { return c_lo > 0.0 ? 1.0 / c_lo : std::numeric_limits<double>::infinity(); }
};

struct NeedleOptions {
  std::optional<int> m_override;
  /// Verification grid size (0: 1e4 in d=2, 1e5 in d=3).
  int grid_points = 0;
  /// Nodes per angular panel in the convolution (0: automatic).
  int nodes_per_panel = 0;
};

/// Nonnegative polynomial h with h^p comparable to f(y) = (1 + n d(center, y))^(-k),
/// built as h(x) = int_{S^d} f^{1/p}(ybar) T_n(xbar . ybar) d sigma(ybar)
/// (normalized sigma), m = floor(k/p) + d + 2 unless overridden.
NeedleResult needle_polynomial(const Point& center, int n, double p, double k, const NeedleOptions& opt = {});

/// max over the probe set of |f(y)| (1 + n d(x, y))^(-beta).
double maximal_function(const BallFn& f, double beta, int n, const Point& x, std::span<const Point> probes);

struct JpResult {
  double value = 0.0;
  /// value * n^d * W_mu(n; x)^(p/2 - 1)
  double ratio = 0.0;
  /// relative change when the panel node count doubles
  double budget_change = 0.0;
};

/// int_B w_mu(y) / (W_mu(n; y)^(p/2) (1 + n d(x, y))^(sigma p)) dy.
/// Requires sigma > d/p + 2 mu |1/p - 1/2|.
JpResult Jp_integral(int n, double mu, double p, double sigma_exp, const Point& x, int nodes_per_panel = 0);

}  // namespace mball
