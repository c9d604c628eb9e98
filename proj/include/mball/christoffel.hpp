#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mball/geometry.hpp"
#include "mball/polyspace.hpp"
#include "mball/quadrature.hpp"
#include "mball/weights.hpp"

namespace mball {

/// Lambda_{n,2}(x) = 1 / sum_j P_j(x)^2 over every element of the basis.
double christoffel_l2(const OrthoBasis& basis, const Point& x);

/// min ||P||_{2,w}^2 over P(x) = 1, solved as a constrained least-squares
/// problem directly in the Phi family (no orthonormal basis involved).
double christoffel_variational(int n, const Weight& w, const Point& x, const QuadratureRule& rule);

struct ChristoffelLpResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  /// ||P_2||_{p,w}^p of the p = 2 minimizer, the starting point.
  double start_objective = 0.0;
};

/// Lambda_{n,p}(x) = min ||P||_{p,w}^p over P in Pi_n^d with P(x) = 1, by
/// iteratively reweighted least squares from the p = 2 minimizer. Reweighting
/// uses max(|P|, 1e-12)^(p-2); steps for p > 2 are damped by 1/(p-1). Stops when
/// the objective changes by less than 1e-9 relative or after 200 iterations.
/// `rule` integrates |P|^p (it must target w); the basis uses the exact
/// degree-2n rule of w.
ChristoffelLpResult christoffel_lp(int n, double p, const Weight& w, const Point& x, const QuadratureRule& rule);
/// Same with an oversampled rule chosen from (n, p).
ChristoffelLpResult christoffel_lp(int n, double p, const Weight& w, const Point& x);

struct ChristoffelRow {
  int n = 0;
  Point x;
  double lambda = 0.0;
  double ball_measure = 0.0;
  double ratio = 0.0;
  bool converged = true;
};

struct ChristoffelScan {
  Weight weight = Weight::jacobi(0.5);
  double p = 2.0;
  std::vector<ChristoffelRow> rows;

  /// max ratio / min ratio over all rows.
  double window() const;
};

/// Radii {0, 0.5, 0.9, 0.99, 1 - 1/n^2} along the first axis.
std::vector<Point> default_scan_points(int n, int dim);

/// Lambda_{n,p}(x) / w(B(x, 1/n)) for every n and x (default_scan_points when
/// x_set is empty).
ChristoffelScan christoffel_scan(const Weight& w, double p, std::span<const int> n_set, int dim,
                                 std::span<const Point> x_set = {});

/// CSV `n,p,x_norm,lambda,ball_measure,ratio`.
void write_christoffel_csv(std::ostream& os, const ChristoffelScan& scan);

struct MollifiedNormWindow {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  int samples = 0;
};

/// ||f||_{p,w_n} / ||f||_{p,w} over random f in Pi_n^d with Gaussian
/// coefficients in the orthonormal basis of w; w_n is the mollified weight.
MollifiedNormWindow mollified_norm_ratio(const Weight& w, int n, double p, int dim, int samples,
                                         std::uint64_t seed);

}  // namespace mball
