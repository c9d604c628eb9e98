#pragma once

#include <cstdint>
#include <vector>

#include "mball/geometry.hpp"
#include "mball/weights.hpp"

namespace mball {

/// Deterministic sample of `count` points in B^d (uniform in the ball).
std::vector<Point> random_ball_points(int dim, int count, std::uint64_t seed);

struct ReproducingReport {
  /// max |int P(y) L_n(x,y) w(y) dy - P(x)| / ||P||_inf over the trials.
  double value_residual = 0.0;
  /// max |int P(y) d_i L_n(x,y) w(y) dy - d_i P(x)| / ||d_i P||_inf.
  double derivative_residual = 0.0;
  int trials = 0;
};

/// Random P in Pi_n^d (Gaussian coefficients in the orthonormal basis of
/// jacobi(mu)), checked at random interior and boundary points.
ReproducingReport reproducing_residual(int n, double mu, int dim, int trials, std::uint64_t seed);

/// max over sampled pairs of
///   |d_i L_n(x,y)| sqrt(W(x)) sqrt(W(y)) (1 + n d(x,y))^k / (min(1/sqrt(1-|x|^2), n) n^(d+1)).
double derivative_kernel_ratio(int n, double mu, int dim, double k, int samples, std::uint64_t seed);

/// max over sampled y, z with d(y,z) <= delta/n and sampled u of
///   |L_n(y,u) - L_n(z,u)| sqrt(W(u)) sqrt(W(y)) (1 + n d(u,y))^k / (n^(d+1) d(y,z)).
double lipschitz_ratio(int n, double mu, int dim, double delta, double k, int samples, std::uint64_t seed);

/// max over sampled y (and both argument slots, every axis) of
/// ||d_i L_n(w_mu; ., y)||_{1,mu} / n^2.
double l1_growth(int n, double mu, int dim, int samples, std::uint64_t seed);

struct MaximalReport {
  double min_ratio = 0.0;  // min ||f*||/||f||, >= 1 expected
  double max_ratio = 0.0;  // max ||f*||/||f||
};

/// ||f*_{beta,n}||_{p,w} / ||f||_{p,w} for random f in Pi_n^d; f* uses the
/// rule nodes plus a quasi-uniform probe grid.
MaximalReport maximal_equivalence(int n, const Weight& w, int dim, double p, double beta, int samples,
                                  std::uint64_t seed);

}  // namespace mball
