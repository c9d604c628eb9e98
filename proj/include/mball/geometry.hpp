#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <vector>

namespace mball {

inline constexpr int kMaxDim = 3;

/// A point of the closed unit ball B^d, d in {2, 3}. Coordinates with norm
/// up to 1 + 1e-12 are accepted and scaled back onto the sphere.
class Point {
 public:
  Point() = default;
  explicit Point(int dim);
  Point(std::initializer_list<double> coords);
  explicit Point(std::span<const double> coords);

  int dim() const noexcept { return dim_; }
  double operator[](int i) const noexcept { return c_[i]; }
  std::span<const double> coords() const noexcept { return {c_.data(), static_cast<size_t>(dim_)}; }

  double norm2() const noexcept;
  double norm() const noexcept;
  /// sqrt(1 - |x|^2), the height of the hemisphere lift.
  double height() const noexcept;

  static Point origin(int dim) { return Point(dim); }
  static Point axis(int dim, int i, double scale = 1.0);

  bool operator==(const Point& o) const noexcept;

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

std::ostream& operator<<(std::ostream& os, const Point& p);

/// d(x,y) = arccos(x.y + sqrt(1-|x|^2) sqrt(1-|y|^2)), in [0, pi].
double dist(const Point& x, const Point& y);

/// Chordal companion of dist between the hemisphere lifts; equals 2 sin(dist/2).
double dist_tilde(const Point& x, const Point& y);

/// Geodesic distance on the unit sphere. Inputs must be unit vectors within 1e-10.
double sphere_dist(std::span<const double> xbar, std::span<const double> ybar);

/// x -> (x, sqrt(1-|x|^2)) on the upper hemisphere of S^d.
std::vector<double> lift(const Point& x);

/// Deterministic quasi-uniform point set in the ball: a quasi-uniform grid on
/// the upper hemisphere of S^d projected down. Roughly `target` points.
std::vector<Point> ball_grid(int dim, int target);

/// Default verification resolution: 1e4 points for d=2, 1e5 for d=3.
int default_grid_size(int dim);

struct SeparatedSet {
  int dim = 2;
  double epsilon = 0.0;
  std::vector<Point> centers;
};

/// Greedy maximal epsilon-separated subset. Candidates are a shuffled
/// quasi-uniform grid followed by the verification grid itself, so every
/// verification point ends up within epsilon of a center.
SeparatedSet maximal_separated_set(int dim, double epsilon, std::uint64_t seed,
                                   int candidate_count = 0, int verify_count = 0);

struct CoverageReport {
  double min_pairwise = 0.0;  // smallest center separation (inf for one center)
  double max_cover_dist = 0.0;  // largest distance from a probe to its nearest center
  int min_overlap = 0;
  int max_overlap = 0;  // empirical C_d
  bool separated = false;
  bool covering = false;
};

CoverageReport check_separated_set(const SeparatedSet& set, std::span<const Point> probes);

/// CSV with header `epsilon,center_index,coord_0,...,coord_{d-1}`.
void write_separated_set_csv(std::ostream& os, const SeparatedSet& set);

}  // namespace mball
