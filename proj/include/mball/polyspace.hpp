#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mball/geometry.hpp"
#include "mball/quadrature.hpp"
#include "mball/weights.hpp"

namespace mball {

/// Multi-index; entries past the dimension are zero.
using MultiIndex = std::array<int, kMaxDim>;

int dim_pi(int n, int d);
int total_degree(const MultiIndex& a) noexcept;

/// Graded index list: degree blocks in increasing order, inside a block the
/// exponents sorted lexicographically descending. Its length is dim_pi(n, d).
std::vector<MultiIndex> graded_indices(int n, int d);
/// Position of `a` in graded_indices(n, d) for any n >= |a|.
int graded_position(const MultiIndex& a, int d);

/// int_B x^alpha (1-|x|^2)^(mu-1/2) dx.
double jacobi_moment(std::span<const int> alpha, double mu, int d);

/// Polynomial in d variables stored in the product-Chebyshev basis
/// T_alpha(x) = prod_i T_{alpha_i}(x_i). Every operation is exact in this
/// basis up to floating-point rounding; monomial coefficients are available
/// through the conversions.
class Poly {
 public:
  explicit Poly(int dim);
  static Poly constant(int dim, double c);
  /// x_i, 0-based axis.
  static Poly coordinate(int dim, int i);
  static Poly from_monomials(int dim, const std::map<MultiIndex, double>& monomials);
  /// Chebyshev coefficients of a graded coefficient vector.
  static Poly from_graded(int dim, std::span<const double> coeffs);

  int dim() const noexcept { return dim_; }
  /// Largest |alpha| with a nonzero coefficient; -1 for the zero polynomial.
  int degree() const noexcept;
  bool is_zero() const noexcept { return terms_.empty(); }

  const std::map<MultiIndex, double>& terms() const noexcept { return terms_; }
  double coeff(const MultiIndex& a) const;
  void add_term(const MultiIndex& a, double c);

  std::map<MultiIndex, double> to_monomials() const;
  /// Coefficients in graded_indices(n, dim) order; throws if degree() > n.
  Eigen::VectorXd to_graded(int n) const;

  double operator()(std::span<const double> x) const;
  double operator()(const Point& x) const { return (*this)(x.coords()); }

  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(double s);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, double s) { return a *= s; }
  friend Poly operator*(double s, Poly a) { return a *= s; }
  friend Poly operator*(const Poly& a, const Poly& b);

  /// Largest absolute coefficient difference.
  double max_coeff_diff(const Poly& o) const;

 private:
  int dim_;
  std::map<MultiIndex, double> terms_;
};

/// Partial derivative along 0-based axis i.
Poly differentiate(const Poly& p, int i);
/// x_i * p.
Poly multiply_coordinate(const Poly& p, int i);
/// D_mu = Laplacian - (x.grad)^2 - (2 mu + d - 1) x.grad.
Poly apply_Dmu(const Poly& p, double mu);

/// T_0..T_n at t.
void chebyshev_values(double t, int n, std::span<double> out);
/// All T_alpha(x), alpha in graded_indices(n, d) order.
Eigen::VectorXd graded_chebyshev_values(std::span<const double> x, int n);

/// Ball-adapted product-Chebyshev family
///   Phi_alpha(x) = prod_i R^{(i)}_{alpha_i}(x),
///   R_0 = 1, R_1 = x_i, R_{k+1} = 2 x_i R_k - s_i R_{k-1},
///   s_i = 1 - x_1^2 - ... - x_{i-1}^2,
/// so R^{(i)}_k = s_i^{k/2} T_k(x_i / sqrt(s_i)). Each Phi_alpha is a polynomial
/// of total degree |alpha| bounded by 1 on the ball, which keeps orthonormal
/// coefficients small where plain Chebyshev products need (1+sqrt 2)^n.
/// Values for alpha in graded_indices(n, d) order.
Eigen::VectorXd graded_ball_values(std::span<const double> x, int n);
/// Values (column 0) and partial derivatives (columns 1..d).
Eigen::MatrixXd graded_ball_values_and_gradient(std::span<const double> x, int n);
/// Phi_alpha in the Poly representation.
Poly ball_chebyshev_poly(const MultiIndex& alpha, int d);

/// Degree-graded orthonormal basis of Pi_n^d in L_{2,w}.
/// Element j is sum_a coeffs(j, a) Phi_{indices[a]}; coeffs is block lower
/// triangular with respect to the degree blocks.
struct OrthoBasis {
  Weight weight = Weight::jacobi(0.5);
  int dim = 2;
  int degree = 0;
  std::vector<MultiIndex> indices;
  Eigen::MatrixXd coeffs;
  double gram_residual = 0.0;
  /// Worst per-degree-block Gram condition estimate seen during construction.
  double worst_condition = 1.0;

  int size() const noexcept { return static_cast<int>(indices.size()); }
  Poly element(int j) const;
  /// First index of the degree-k block.
  int block_start(int k) const { return k == 0 ? 0 : dim_pi(k - 1, dim); }
  int block_degree(int j) const;
  /// Values of every element at x.
  Eigen::VectorXd eval(std::span<const double> x) const;
  Eigen::VectorXd eval(const Point& x) const { return eval(x.coords()); }
  /// Partial derivatives of every element at x (elements x d).
  Eigen::MatrixXd gradient(std::span<const double> x) const;
  /// Values of every element at every rule node (nodes x elements).
  Eigen::MatrixXd eval_nodes(const QuadratureRule& rule) const;
  /// Polynomial with the given coefficient vector in this basis.
  Poly combine(std::span<const double> a) const;
  /// The first dim_pi(m) elements, which form the degree-m basis.
  OrthoBasis truncated(int m) const;
};

/// Modified Gram-Schmidt with one full re-orthogonalization pass on the
/// graded ball-adapted Chebyshev family, inner products from `rule`.
/// `shuffle_seed` permutes the initial order inside each degree block.
OrthoBasis orthonormal_basis(int n, const Weight& w, const QuadratureRule& rule,
                             std::optional<std::uint64_t> shuffle_seed = std::nullopt);
/// Convenience overload building the exact rule of degree 2n.
OrthoBasis orthonormal_basis(int n, const Weight& w, int dim);

/// Block Gram condition above which construction fails.
inline constexpr double kMaxBlockCondition = 1e14;

struct DiffMatrix {
  int axis = 0;  // 0-based
  Eigen::MatrixXd matrix;  // N_{n-1} x N_n
};

/// Entry (k, j) = <d_i P_j, P_k>_{2,w} by quadrature inner products; the
/// derivatives come from the differentiated three-term recurrences.
DiffMatrix differentiation_matrix(const OrthoBasis& basis_n, const OrthoBasis& basis_n_minus_1, int axis,
                                  const QuadratureRule& rule);
DiffMatrix differentiation_matrix(const OrthoBasis& basis_n, const OrthoBasis& basis_n_minus_1, int axis);
/// Same matrix with each element expanded as a Poly and differentiated
/// coefficientwise. Slower; meant for moderate degrees.
DiffMatrix differentiation_matrix_poly(const OrthoBasis& basis_n, const OrthoBasis& basis_n_minus_1,
                                       int axis);

/// Rows of (element_index, degree, alpha..., coefficient) over the Phi family.
void write_basis_csv(std::ostream& os, const OrthoBasis& basis);

}  // namespace mball
