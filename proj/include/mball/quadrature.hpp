#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mball/geometry.hpp"
#include "mball/weights.hpp"

namespace mball {

enum class RuleDomain { interval, ball, sphere };

/// Nodes and positive weights with a declared polynomial exactness degree
/// against a declared measure.
///
///   interval: nodes in (-1,1), measure (1-t)^alpha (1+t)^beta dt
///   ball:     nodes in B^d, measure `target` weight times dx
///   sphere:   unit vectors in R^dim, normalized surface measure
struct QuadratureRule {
  RuleDomain domain = RuleDomain::interval;
  int dim = 1;
  std::vector<double> nodes;  // row-major, size() == dim * weights.size()
  std::vector<double> weights;
  int exactness = 0;
  double alpha = 0.0;  // interval rules only
  double beta = 0.0;
  std::optional<Weight> target;  // ball rules only

  size_t size() const noexcept { return weights.size(); }
  std::span<const double> node(size_t k) const noexcept {
    return {nodes.data() + k * dim, static_cast<size_t>(dim)};
  }
  Point point(size_t k) const { return Point(node(k)); }
  double total_weight() const;
  std::string describe() const;
};

/// Golub-Welsch rule with m nodes for (1-t)^alpha (1+t)^beta on [-1,1],
/// exact to degree 2m-1. Nodes sorted ascending.
QuadratureRule gauss_jacobi_1d(int m, double alpha, double beta);
QuadratureRule gauss_legendre_1d(int m);

/// Rule on B^d exact to total degree `degree` against w_mu: radial
/// Gauss-Jacobi in t = 2r^2 - 1 times an equal-angle rule (d=2) or a
/// Gauss-Legendre x trapezoid sphere rule (d=3).
QuadratureRule ball_rule(int degree, double mu, int dim);

/// Exact rule for any catalog weight:
///   jacobi      -> ball_rule
///   product     -> reflected collapsed-simplex Gauss-Jacobi rule
///   radial-step -> radial Gauss-Legendre split at the jump radius
QuadratureRule weight_rule(const Weight& w, int degree, int dim);

/// Rule on S^{ambient_dim-1} exact to `degree`, total weight 1.
QuadratureRule sphere_rule(int degree, int ambient_dim);

/// Exactness degree used for integrals of |f|^p with f of degree `deg`.
int oversampled_degree(int deg, double p = 2.0);

using BallFunction = std::function<double(const Point&)>;

/// (sum_k weight_k |f(x_k)|^p c_k)^(1/p). When the rule's target differs from
/// w the correction c_k = w(x_k)/target(x_k) is applied (`allow_reweight`).
double weighted_norm(const BallFunction& f, const Weight& w, double p, const QuadratureRule& rule,
                     bool allow_reweight = false);
/// Same with precomputed f values at the rule nodes.
double weighted_norm_values(std::span<const double> values, double p, std::span<const double> weights);

/// Interval quadrature of f over [-1,1] against (1-t^2)^e with f non-smooth
/// only at the supplied breakpoints. Endpoint panels use Gauss-Jacobi for the
/// endpoint factor, interior panels Gauss-Legendre; `m` nodes per panel.
double integrate_interval_split(const std::function<double(double)>& f, double e,
                                std::vector<double> breaks, int m);

void write_rule_csv(std::ostream& os, const QuadratureRule& rule);

}  // namespace mball
