#include "mball/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace mball {

namespace {

constexpr double kPi = std::numbers::pi;

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("point dimension must be in [1, 3], got " + std::to_string(dim));
  }
}

void check_same_dim(const Point& x, const Point& y) {
  if (x.dim() != y.dim()) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(x.dim()) + " vs " +
                                std::to_string(y.dim()));
  }
}

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

double dot_lifted(const Point& x, const Point& y) {
  double s = 0.0;
  for (int i = 0; i < x.dim(); ++i) s += x[i] * y[i];
  return s + x.height() * y.height();
}

}  // namespace

Point::Point(int dim) : dim_(dim) { check_dim(dim); }

Point::Point(std::initializer_list<double> coords)
    : Point(std::span<const double>(coords.begin(), coords.size())) {}

Point::Point(std::span<const double> coords) : dim_(static_cast<int>(coords.size())) {
  check_dim(dim_);
  for (int i = 0; i < dim_; ++i) {
    if (!std::isfinite(coords[i])) throw std::invalid_argument("non-finite coordinate");
    c_[i] = coords[i];
  }
  const double r2 = norm2();
  if (r2 > 1.0) {
    const double r = std::sqrt(r2);
    if (r > 1.0 + 1e-12) {
      throw std::invalid_argument("point lies outside the closed unit ball (|x| = " +
                                  std::to_string(r) + ")");
    }
    for (int i = 0; i < dim_; ++i) c_[i] /= r;
  }
}

double Point::norm2() const noexcept {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += c_[i] * c_[i];
  return s;
}

double Point::norm() const noexcept { return std::sqrt(norm2()); }

double Point::height() const noexcept { return std::sqrt(std::max(0.0, 1.0 - norm2())); }

Point Point::axis(int dim, int i, double scale) {
  Point p(dim);
  if (i < 0 || i >= dim) throw std::invalid_argument("axis index out of range");
  std::array<double, kMaxDim> c{};
  c[i] = scale;
  return Point(std::span<const double>(c.data(), static_cast<size_t>(dim)));
}

bool Point::operator==(const Point& o) const noexcept {
  if (dim_ != o.dim_) return false;
  for (int i = 0; i < dim_; ++i)
    if (c_[i] != o.c_[i]) return false;
  return true;
}

std::ostream& operator<<(std::ostream& os, const Point& p) {
  os << '(';
  for (int i = 0; i < p.dim(); ++i) os << (i ? ", " : "") << p[i];
  return os << ')';
}

double dist(const Point& x, const Point& y) {
  check_same_dim(x, y);
  const double c = dot_lifted(x, y);
  if (c < 0.5) return std::acos(clamp_unit(c));
  return 2 * std::asin(std::min(1.0, dist_tilde(x, y) / 2));
}

double dist_tilde(const Point& x, const Point& y) {
  check_same_dim(x, y);
  double s = 0.0;
  for (int i = 0; i < x.dim(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  const double dh = x.height() - y.height();
  return std::sqrt(s + dh * dh);
}

double sphere_dist(std::span<const double> xbar, std::span<const double> ybar) {
  if (xbar.size() != ybar.size()) throw std::invalid_argument("dimension mismatch");
  double nx = 0.0, ny = 0.0, dot = 0.0;
  for (size_t i = 0; i < xbar.size(); ++i) {
    nx += xbar[i] * xbar[i];
    ny += ybar[i] * ybar[i];
    dot += xbar[i] * ybar[i];
  }
  if (std::abs(std::sqrt(nx) - 1.0) > 1e-10 || std::abs(std::sqrt(ny) - 1.0) > 1e-10) {
    throw std::invalid_argument("sphere_dist requires unit vectors");
  }
  return std::acos(clamp_unit(dot));
}

std::vector<double> lift(const Point& x) {
  std::vector<double> out(x.coords().begin(), x.coords().end());
  out.push_back(x.height());
  return out;
}

int default_grid_size(int dim) { return dim == 2 ? 10000 : 100000; }

std::vector<Point> ball_grid(int dim, int target) {
  check_dim(dim);
  if (dim == 1) throw std::invalid_argument("ball_grid supports d in {2, 3}");
  if (target < 1) throw std::invalid_argument("ball_grid target must be positive");
  std::vector<Point> pts;
  pts.reserve(static_cast<size_t>(target) + target / 4);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  if (dim == 2) {
    // Hemisphere of S^2 has area 2 pi.
    const double step = std::sqrt(2.0 * kPi / target);
    const int rings = std::max(1, static_cast<int>(std::lround(0.5 * kPi / step)));
    const double dtheta = 0.5 * kPi / rings;
    pts.emplace_back(Point::origin(2));
    for (int i = 1; i <= rings; ++i) {
      const double theta = i * dtheta;
      const double r = std::sin(theta);
      const int count = std::max(1, static_cast<int>(std::lround(2.0 * kPi * r / dtheta)));
      const double offset = i * golden;
      for (int j = 0; j < count; ++j) {
        const double phi = offset + 2.0 * kPi * j / count;
        pts.emplace_back(Point{r * std::cos(phi), r * std::sin(phi)});
      }
    }
  } else {
    // Hemisphere of S^3 has volume pi^2.
    const double step = std::cbrt(kPi * kPi / target);
    const int rings = std::max(1, static_cast<int>(std::lround(0.5 * kPi / step)));
    const double dtheta = 0.5 * kPi / rings;
    pts.emplace_back(Point::origin(3));
    for (int i = 1; i <= rings; ++i) {
      const double theta = i * dtheta;
      const double r = std::sin(theta);
      const int count =
          std::max(1, static_cast<int>(std::lround(4.0 * kPi * r * r / (dtheta * dtheta))));
      // Fibonacci lattice on the S^2 slice of radius r.
      for (int j = 0; j < count; ++j) {
        const double z = 1.0 - (2.0 * j + 1.0) / count;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * j + i;
        pts.emplace_back(Point{r * rho * std::cos(phi), r * rho * std::sin(phi), r * z});
      }
    }
  }
  return pts;
}

SeparatedSet maximal_separated_set(int dim, double epsilon, std::uint64_t seed,
                                   int candidate_count, int verify_count) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (epsilon > kPi) throw std::invalid_argument("epsilon must not exceed pi");
  if (verify_count <= 0) verify_count = default_grid_size(dim);
  if (candidate_count <= 0) candidate_count = 4 * verify_count;

  std::vector<Point> candidates = ball_grid(dim, candidate_count);
  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  const std::vector<Point> verify = ball_grid(dim, verify_count);
  candidates.insert(candidates.end(), verify.begin(), verify.end());

  // Strict separation: a candidate joins when every center is at distance >= eps.
  // Compare lifted dot products: dist >= eps  <=>  dot <= cos(eps).
  const double cos_eps = std::cos(epsilon);
  SeparatedSet set{dim, epsilon, {}};
  for (const Point& c : candidates) {
    bool ok = true;
    for (const Point& z : set.centers) {
      if (dot_lifted(c, z) > cos_eps) {
        ok = false;
        break;
      }
    }
    if (ok) set.centers.push_back(c);
  }
  return set;
}

CoverageReport check_separated_set(const SeparatedSet& set, std::span<const Point> probes) {
  CoverageReport rep;
  rep.min_pairwise = std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < set.centers.size(); ++a)
    for (size_t b = a + 1; b < set.centers.size(); ++b)
      rep.min_pairwise = std::min(rep.min_pairwise, dist(set.centers[a], set.centers[b]));
  rep.separated = rep.min_pairwise >= set.epsilon * (1.0 - 1e-12);

  rep.min_overlap = std::numeric_limits<int>::max();
  rep.max_overlap = 0;
  for (const Point& x : probes) {
    int count = 0;
    double nearest = kPi;
    for (const Point& z : set.centers) {
      const double d = dist(x, z);
      nearest = std::min(nearest, d);
      if (d <= set.epsilon) ++count;
    }
    rep.max_cover_dist = std::max(rep.max_cover_dist, nearest);
    rep.min_overlap = std::min(rep.min_overlap, count);
    rep.max_overlap = std::max(rep.max_overlap, count);
  }
  if (probes.empty()) rep.min_overlap = 0;
  rep.covering = !probes.empty() && rep.min_overlap >= 1;
  return rep;
}

void write_separated_set_csv(std::ostream& os, const SeparatedSet& set) {
  os << "epsilon,center_index";
  for (int i = 0; i < set.dim; ++i) os << ",coord_" << i;
  os << '\n';
  os.precision(17);
  for (size_t k = 0; k < set.centers.size(); ++k) {
    os << set.epsilon << ',' << k;
    for (int i = 0; i < set.dim; ++i) os << ',' << set.centers[k][i];
    os << '\n';
  }
}

}  // namespace mball
