#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "mball/geometry.hpp"

namespace mball {

/// Catalog of doubling weights on the ball.
///   jacobi(mu):          (1-|x|^2)^(mu-1/2),                       mu >= 0
///   product(g_1..g_d;mu): prod |x_i|^(2 g_i) * (1-|x|^2)^(mu-1/2),  g_i, mu >= 0
///   radial-step(a, c):   1 for |x| <= a, c for |x| > a,            0 < a < 1, c > 0
class Weight {
 public:
  enum class Kind { jacobi, product, radial_step };

  static Weight jacobi(double mu);
  static Weight product(std::vector<double> gammas, double mu);
  static Weight radial_step(double a, double c);

  /// Parses `jacobi:mu=1.0`, `product:g=0.5,0.5;mu=0.5`, `step:a=0.5;c=100`.
  static Weight parse(const std::string& spec);
  /// Canonical spec string; parse(to_string()) == *this.
  std::string to_string() const;

  Kind kind() const noexcept { return kind_; }
  double mu() const noexcept { return mu_; }
  const std::vector<double>& gammas() const noexcept { return gammas_; }
  double step_radius() const noexcept { return a_; }
  double step_value() const noexcept { return c_; }

  /// Depends on x only through |x|.
  bool is_radial() const noexcept { return kind_ != Kind::product; }
  /// Dimension the weight is tied to, or 0 when it works in any dimension.
  int required_dim() const noexcept { return kind_ == Kind::product ? static_cast<int>(gammas_.size()) : 0; }

  /// Throws BoundarySingularityError for |x| = 1 when the weight blows up there.
  double eval(const Point& x) const;
  /// Same as eval but given |x|^2 and the coordinates (no range checks).
  double eval_raw(std::span<const double> x, double r2) const;

  /// Exact moment int_B x^alpha w(x) dx.
  double moment(std::span<const int> alpha) const;
  double total_mass(int dim) const;

  bool operator==(const Weight& o) const noexcept;

 private:
  Weight() = default;
  Kind kind_ = Kind::jacobi;
  double mu_ = 0.5;
  std::vector<double> gammas_;
  double a_ = 0.0;
  double c_ = 1.0;
};

/// Closed-form moment for product/jacobi weights:
/// int_B prod x_i^{alpha_i} |x_i|^{2 g_i} (1-|x|^2)^{mu-1/2} dx.
double dirichlet_moment(std::span<const int> alpha, std::span<const double> gammas, double mu);

enum class BallMeasureMethod { automatic, quadrature, montecarlo };

struct MeasureEstimate {
  double value = 0.0;
  double stderr_ = 0.0;  // zero for the quadrature method
};

/// w(B(x, r)) with B(x, r) = {y : d(x, y) <= r}.
///
/// The quadrature method works on the hemisphere lift: B(x, r) is the part of
/// the spherical cap of radius r around x-bar lying in the upper hemisphere,
/// and dy = y_{d+1} d sigma. The cap is integrated in polar coordinates around
/// x-bar with the angular panels split wherever the integrand is non-smooth
/// (the hemisphere boundary and, for radial-step, the jump radius). `budget`
/// is the Gauss-Legendre node count per panel (>= 10).
///
/// The Monte Carlo method samples uniformly on the lifted cap (which is the
/// boundary reweighting: the y_{d+1} Jacobian carries it), `budget` samples.
MeasureEstimate ball_measure_estimate(const Weight& w, const Point& x, double r,
                                      BallMeasureMethod method = BallMeasureMethod::automatic,
                                      int budget = 0, std::uint64_t seed = 0);

double ball_measure(const Weight& w, const Point& x, double r,
                    BallMeasureMethod method = BallMeasureMethod::automatic, int budget = 0);

/// Integrand on the lifted sphere: ybar in R^{d+1} (upper hemisphere) and its
/// geodesic angle theta from the lifted center.
using LiftedIntegrand = std::function<double(std::span<const double> ybar, double theta)>;

struct LiftedCapOptions {
  /// Gauss-Legendre nodes per angular panel.
  int nodes_per_panel = 48;
  /// Heights ybar_{d+1} where the integrand is not smooth; 0 is always added.
  std::vector<double> height_levels{0.0};
  /// Extra breakpoints in theta.
  std::vector<double> theta_breaks;
  /// Integrand depends only on (theta, ybar_{d+1}); skips the transverse sphere.
  bool axial = false;
  /// Split where a coordinate y_i vanishes (product weights).
  bool coordinate_kinks = false;
  /// Trapezoid points on the transverse circle for d = 3 (0: 2 * nodes_per_panel).
  int transverse_nodes = 0;
};

/// Integral of F d sigma (unnormalized surface measure) over the part of the
/// spherical cap of radius r around lift(x) lying in the upper hemisphere.
/// Polar coordinates around lift(x), panels split at the hemisphere boundary
/// and the given levels.
double integrate_lifted_cap(const Point& x, double r, const LiftedIntegrand& F,
                            const LiftedCapOptions& opt = {});

struct DoublingReport {
  double estimated_L = 1.0;
  double estimated_s_w = 0.0;
  int sample_count = 0;
  Point worst_x;
  double worst_r = 0.0;
  /// Running maximum after each sample, so prefixes can be compared.
  std::vector<double> running_max;
};

/// Empirical lower estimate of the doubling constant: max over sampled (x, r)
/// of w(B(x,2r)) / w(B(x,r)), with x from the verification grid and r
/// log-uniform in [1e-3, pi].
DoublingReport doubling_estimate(const Weight& w, int dim, int sample_count, std::uint64_t seed,
                                 int grid_size = 0);

/// (sqrt(1-|x|^2) + 1/n)^(2 mu).
double cal_W(double mu, int n, const Point& x);

/// w_n(x) = w(B(x,1/n)) / w_{1/2}(B(x,1/n)), cached per evaluation point.
class MollifiedWeight {
 public:
  MollifiedWeight(Weight w, int n, int budget = 0);
  double operator()(const Point& x) const;
  const Weight& base() const noexcept { return w_; }
  int n() const noexcept { return n_; }

 private:
  Weight w_;
  int n_;
  int budget_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<double>, double> cache_;
};

double mollified_weight(const Weight& w, int n, const Point& x);

}  // namespace mball
