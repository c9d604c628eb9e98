#include "mball/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mball/errors.hpp"
#include "mball/quadrature.hpp"

namespace mball {

namespace {

constexpr double kPi = std::numbers::pi;

double parse_number(const std::string& s, const std::string& spec) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed number '" + s + "' in weight spec '" + spec + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != ' ' && ch != '\t') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// w(y) * y_{d+1} on the hemisphere, as a function of the lifted point.
double lifted_density(const Weight& w, std::span<const double> y, double h) {
  switch (w.kind()) {
    case Weight::Kind::jacobi:
      return std::pow(h, 2.0 * w.mu());
    case Weight::Kind::product: {
      double v = std::pow(h, 2.0 * w.mu());
      for (size_t i = 0; i < w.gammas().size(); ++i) {
        if (w.gammas()[i] != 0.0) v *= std::pow(std::abs(y[i]), 2.0 * w.gammas()[i]);
      }
      return v;
    }
    case Weight::Kind::radial_step: {
      const double a = w.step_radius();
      return h * (1.0 - h * h <= a * a ? 1.0 : w.step_value());
    }
  }
  return 0.0;
}

// Heights of the lifted point where the density is not smooth.
std::vector<double> height_levels(const Weight& w) {
  std::vector<double> levels{0.0};
  if (w.kind() == Weight::Kind::radial_step) {
    const double a = w.step_radius();
    levels.push_back(std::sqrt(1.0 - a * a));
  }
  return levels;
}

struct CapFrame {
  int d = 2;
  std::vector<double> center;                  // x-bar in R^{d+1}
  std::vector<double> toward_pole;             // e-hat, tangent
  std::vector<std::vector<double>> transverse;  // orthonormal complement in the tangent space
  double a = 1.0;  // x-bar_{d+1}
  double b = 0.0;  // |x|
};

// Orthonormal completion by Gram-Schmidt against the standard basis.
std::vector<std::vector<double>> complete_basis(const std::vector<std::vector<double>>& given, int n) {
  std::vector<std::vector<double>> basis = given;
  std::vector<std::vector<double>> extra;
  for (int k = 0; k < n && static_cast<int>(basis.size()) < n; ++k) {
    std::vector<double> v(n, 0.0);
    v[k] = 1.0;
    for (const auto& q : basis) {
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += q[i] * v[i];
      for (int i = 0; i < n; ++i) v[i] -= dot * q[i];
    }
    double nv = 0.0;
    for (double c : v) nv += c * c;
    nv = std::sqrt(nv);
    if (nv < 1e-6) continue;
    for (double& c : v) c /= nv;
    basis.push_back(v);
    extra.push_back(v);
  }
  return extra;
}

CapFrame make_frame(const Point& x) {
  CapFrame f;
  f.d = x.dim();
  const int n = f.d + 1;
  f.center = lift(x);
  f.a = f.center[f.d];
  f.b = x.norm();
  f.toward_pole.assign(n, 0.0);
  if (f.b > 1e-14) {
    for (int i = 0; i < n; ++i) f.toward_pole[i] = -f.a * f.center[i];
    f.toward_pole[f.d] += 1.0;
    double nv = 0.0;
    for (double c : f.toward_pole) nv += c * c;
    nv = std::sqrt(nv);
    for (double& c : f.toward_pole) c /= nv;
  } else {
    f.toward_pole[0] = 1.0;  // any tangent direction at the pole
    f.b = 0.0;
  }
  f.transverse = complete_basis({f.center, f.toward_pole}, n);
  return f;
}

// Gauss-Legendre on each panel after a smoothstep substitution, which removes
// square-root behaviour at the panel ends.
template <class F>
double integrate_panels(const std::vector<double>& breaks, double lo, double hi, const QuadratureRule& gl,
                        F&& f) {
  std::vector<double> pts{lo};
  for (double b : breaks)
    if (b > lo && b < hi) pts.push_back(b);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (size_t p = 0; p + 1 < pts.size(); ++p) {
    const double a = pts[p], len = pts[p + 1] - pts[p];
    if (len <= 0.0) continue;
    for (size_t k = 0; k < gl.size(); ++k) {
      const double s = 0.5 * (1.0 + gl.nodes[k]);
      const double t = a + len * s * s * (3.0 - 2.0 * s);
      const double jac = len * 6.0 * s * (1.0 - s) * 0.5;
      total += gl.weights[k] * jac * f(t);
    }
  }
  return total;
}

double cap_quadrature(const Weight& w, const Point& x, double r, int nodes_per_panel) {
  LiftedCapOptions opt;
  opt.nodes_per_panel = nodes_per_panel;
  opt.height_levels = height_levels(w);
  opt.axial = w.is_radial();
  opt.coordinate_kinks = !w.is_radial();
  const int d = x.dim();
  return integrate_lifted_cap(
      x, r,
      [&](std::span<const double> ybar, double) {
        return lifted_density(w, ybar.first(d), ybar[d]);
      },
      opt);
}

MeasureEstimate cap_montecarlo(const Weight& w, const Point& x, double r, int samples, std::uint64_t seed) {
  const CapFrame fr = make_frame(x);
  const int d = fr.d;
  const int n = d + 1;
  const double R = std::min(r, kPi);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double cap_area;
  if (d == 2) {
    cap_area = 2.0 * kPi * (1.0 - std::cos(R));
  } else {
    cap_area = 4.0 * kPi * (0.5 * R - 0.25 * std::sin(2.0 * R));
  }
  const double smax = R >= 0.5 * kPi ? 1.0 : std::sin(R);
  // Tangent basis: toward_pole plus transverse.
  std::vector<std::vector<double>> tangent{fr.toward_pole};
  for (const auto& v : fr.transverse) tangent.push_back(v);

  std::vector<double> ybar(n), xi(n);
  double sum = 0.0, sumsq = 0.0;
  for (int s = 0; s < samples; ++s) {
    double theta;
    if (d == 2) {
      theta = std::acos(1.0 - unif(rng) * (1.0 - std::cos(R)));
    } else {
      do {
        theta = unif(rng) * R;
      } while (unif(rng) * smax * smax > std::sin(theta) * std::sin(theta));
    }
    std::fill(xi.begin(), xi.end(), 0.0);
    double nrm = 0.0;
    std::vector<double> g(d);
    for (int k = 0; k < d; ++k) {
      g[k] = gauss(rng);
      nrm += g[k] * g[k];
    }
    nrm = std::sqrt(nrm);
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < n; ++i) xi[i] += g[k] / nrm * tangent[k][i];
    for (int i = 0; i < n; ++i) ybar[i] = std::cos(theta) * fr.center[i] + std::sin(theta) * xi[i];
    const double h = ybar[d];
    const double v = h > 0.0 ? lifted_density(w, std::span<const double>(ybar.data(), d), h) : 0.0;
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / samples;
  const double var = std::max(0.0, sumsq / samples - mean * mean);
  return {cap_area * mean, cap_area * std::sqrt(var / std::max(1, samples - 1))};
}

}  // namespace

double integrate_lifted_cap(const Point& x, double r, const LiftedIntegrand& F, const LiftedCapOptions& opt) {
  if (opt.nodes_per_panel < 2) throw std::invalid_argument("integrate_lifted_cap: need >= 2 nodes per panel");
  const CapFrame fr = make_frame(x);
  const int d = fr.d;
  const int n = d + 1;
  const double R = std::min(r, kPi);
  const QuadratureRule gl = gauss_legendre_1d(opt.nodes_per_panel);
  std::vector<double> levels = opt.height_levels;
  if (std::find(levels.begin(), levels.end(), 0.0) == levels.end()) levels.push_back(0.0);
  const double theta0 = std::atan2(fr.b, fr.a);

  std::vector<double> theta_breaks = opt.theta_breaks;
  for (double lv : levels) {
    const double ac = std::acos(std::clamp(lv, -1.0, 1.0));
    for (double t : {ac - theta0, ac + theta0, theta0 - ac}) theta_breaks.push_back(t);
  }

  // Transverse sphere S^{d-2}; an axial integrand only needs its measure.
  std::vector<std::vector<double>> omegas;
  std::vector<double> omega_w;
  if (opt.axial) {
    omegas.push_back(std::vector<double>(n, 0.0));
    omega_w.push_back(d == 2 ? 2.0 : 2.0 * kPi);
  } else if (d == 2) {
    omegas.push_back(fr.transverse[0]);
    std::vector<double> neg(fr.transverse[0]);
    for (double& c : neg) c = -c;
    omegas.push_back(neg);
    omega_w = {1.0, 1.0};
  } else {
    const int m = opt.transverse_nodes > 0 ? opt.transverse_nodes : 2 * opt.nodes_per_panel;
    for (int j = 0; j < m; ++j) {
      const double phi = 2.0 * kPi * j / m;
      std::vector<double> v(n);
      for (int i = 0; i < n; ++i) v[i] = std::cos(phi) * fr.transverse[0][i] + std::sin(phi) * fr.transverse[1][i];
      omegas.push_back(v);
      omega_w.push_back(2.0 * kPi / m);
    }
  }

  std::vector<double> ybar(n);
  auto inner = [&](double theta) {
    const double ct = std::cos(theta), st = std::sin(theta);
    if (fr.a * ct + fr.b * st <= 0.0) return 0.0;
    std::vector<double> level_breaks;
    if (fr.b * st > 0.0) {
      for (double lv : levels) {
        const double c = (lv - fr.a * ct) / (fr.b * st);
        if (c > -1.0 && c < 1.0) level_breaks.push_back(std::acos(c));
      }
    }
    double total = 0.0;
    for (size_t j = 0; j < omegas.size(); ++j) {
      const std::vector<double>& om = omegas[j];
      std::vector<double> psi_breaks = level_breaks;
      if (opt.coordinate_kinks) {
        // y_i = A + B cos(psi) + C sin(psi) vanishes where |y_i|^(2 g_i) has a kink.
        for (int i = 0; i < d; ++i) {
          const double A = ct * fr.center[i], B = st * fr.toward_pole[i], C = st * om[i];
          const double Rr = std::hypot(B, C);
          if (Rr <= std::abs(A) || Rr == 0.0) continue;
          const double phi = std::atan2(C, B), dpsi = std::acos(-A / Rr);
          for (double psi : {phi + dpsi, phi - dpsi}) {
            psi = std::remainder(psi, 2.0 * kPi);
            if (psi > 0.0 && psi < kPi) psi_breaks.push_back(psi);
          }
        }
      }
      auto integrand = [&](double psi) {
        const double cp = std::cos(psi), sp = std::sin(psi);
        const double h = fr.a * ct + fr.b * st * cp;
        if (h < 0.0) return 0.0;
        for (int i = 0; i < n; ++i) ybar[i] = ct * fr.center[i] + st * (cp * fr.toward_pole[i] + sp * om[i]);
        ybar[d] = h;
        const double measure = d == 2 ? 1.0 : sp;
        return measure * F(ybar, theta);
      };
      total += omega_w[j] * integrate_panels(psi_breaks, 0.0, kPi, gl, integrand);
    }
    return std::pow(st, d - 1) * total;
  };
  return integrate_panels(theta_breaks, 0.0, R, gl, inner);
}

Weight Weight::jacobi(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("jacobi weight requires mu >= 0");
  Weight w;
  w.kind_ = Kind::jacobi;
  w.mu_ = mu;
  return w;
}

Weight Weight::product(std::vector<double> gammas, double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("product weight requires mu >= 0");
  if (gammas.size() < 2 || gammas.size() > 3) {
    throw std::invalid_argument("product weight needs one exponent per coordinate (d in {2,3})");
  }
  for (double g : gammas)
    if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("product weight requires gamma_i >= 0");
  Weight w;
  w.kind_ = Kind::product;
  w.mu_ = mu;
  w.gammas_ = std::move(gammas);
  return w;
}

Weight Weight::radial_step(double a, double c) {
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("radial-step weight requires 0 < a < 1");
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("radial-step weight requires c > 0");
  Weight w;
  w.kind_ = Kind::radial_step;
  w.a_ = a;
  w.c_ = c;
  return w;
}

Weight Weight::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("weight spec '" + spec + "' lacks ':'");
  std::string kind = spec.substr(0, colon);
  std::erase_if(kind, [](char ch) { return ch == ' ' || ch == '\t'; });
  std::map<std::string, std::string> kv;
  for (const std::string& item : split(spec.substr(colon + 1), ';')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("weight parameter '" + item + "' lacks '='");
    const std::string key = item.substr(0, eq);
    if (kv.count(key)) throw std::invalid_argument("duplicate weight parameter '" + key + "'");
    kv[key] = item.substr(eq + 1);
  }
  auto take = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("weight spec '" + spec + "' is missing '" + key + "'");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  Weight w;
  if (kind == "jacobi") {
    w = jacobi(parse_number(take("mu"), spec));
  } else if (kind == "product") {
    std::vector<double> g;
    for (const std::string& s : split(take("g"), ',')) g.push_back(parse_number(s, spec));
    w = product(std::move(g), parse_number(take("mu"), spec));
  } else if (kind == "step" || kind == "radial-step") {
    const double a = parse_number(take("a"), spec);
    w = radial_step(a, parse_number(take("c"), spec));
  } else {
    throw std::invalid_argument("unknown weight kind '" + kind + "'");
  }
  if (!kv.empty()) throw std::invalid_argument("unknown weight parameter '" + kv.begin()->first + "'");
  return w;
}

std::string Weight::to_string() const {
  switch (kind_) {
    case Kind::jacobi:
      return "jacobi:mu=" + format_number(mu_);
    case Kind::product: {
      std::string g;
      for (size_t i = 0; i < gammas_.size(); ++i) g += (i ? "," : "") + format_number(gammas_[i]);
      return "product:g=" + g + ";mu=" + format_number(mu_);
    }
    case Kind::radial_step:
      return "step:a=" + format_number(a_) + ";c=" + format_number(c_);
  }
  return {};
}

double Weight::eval_raw(std::span<const double> x, double r2) const {
  switch (kind_) {
    case Kind::jacobi:
      return mu_ == 0.5 ? 1.0 : std::pow(std::max(0.0, 1.0 - r2), mu_ - 0.5);
    case Kind::product: {
      double v = mu_ == 0.5 ? 1.0 : std::pow(std::max(0.0, 1.0 - r2), mu_ - 0.5);
      for (size_t i = 0; i < gammas_.size(); ++i)
        if (gammas_[i] != 0.0) v *= std::pow(std::abs(x[i]), 2.0 * gammas_[i]);
      return v;
    }
    case Kind::radial_step:
      return r2 <= a_ * a_ ? 1.0 : c_;
  }
  return 0.0;
}

double Weight::eval(const Point& x) const {
  if (kind_ == Kind::product && x.dim() != static_cast<int>(gammas_.size())) {
    throw std::invalid_argument("product weight dimension does not match the point");
  }
  const double r2 = x.norm2();
  if (kind_ != Kind::radial_step && mu_ < 0.5 && r2 >= 1.0) {
    throw BoundarySingularityError("weight " + to_string() + " is infinite on the unit sphere");
  }
  return eval_raw(x.coords(), r2);
}

double dirichlet_moment(std::span<const int> alpha, std::span<const double> gammas, double mu) {
  double half_sum = 0.0, log_num = std::lgamma(mu + 0.5);
  for (size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] < 0) throw std::invalid_argument("negative multi-index");
    if (alpha[i] % 2 != 0) return 0.0;
    const double g = i < gammas.size() ? gammas[i] : 0.0;
    const double s = 0.5 * (alpha[i] + 2.0 * g + 1.0);
    half_sum += s;
    log_num += std::lgamma(s);
  }
  return std::exp(log_num - std::lgamma(half_sum + mu + 0.5));
}

double Weight::moment(std::span<const int> alpha) const {
  switch (kind_) {
    case Kind::jacobi:
      return dirichlet_moment(alpha, {}, mu_);
    case Kind::product:
      if (alpha.size() != gammas_.size()) throw std::invalid_argument("moment dimension mismatch");
      return dirichlet_moment(alpha, gammas_, mu_);
    case Kind::radial_step: {
      // int_S xi^alpha * int_0^1 r^{|alpha|+d-1} w(r) dr
      int total = 0;
      double log_sphere = std::log(2.0);
      for (int a : alpha) {
        if (a % 2 != 0) return 0.0;
        total += a;
        log_sphere += std::lgamma(0.5 * (a + 1.0));
      }
      const int d = static_cast<int>(alpha.size());
      log_sphere -= std::lgamma(0.5 * (total + d));
      const double m = total + d;
      const double radial = (std::pow(a_, m) + c_ * (1.0 - std::pow(a_, m))) / m;
      return std::exp(log_sphere) * radial;
    }
  }
  return 0.0;
}

double Weight::total_mass(int dim) const {
  std::vector<int> zero(dim, 0);
  return moment(zero);
}

bool Weight::operator==(const Weight& o) const noexcept {
  if (kind_ != o.kind_) return false;
  switch (kind_) {
    case Kind::jacobi:
      return mu_ == o.mu_;
    case Kind::product:
      return mu_ == o.mu_ && gammas_ == o.gammas_;
    case Kind::radial_step:
      return a_ == o.a_ && c_ == o.c_;
  }
  return false;
}

MeasureEstimate ball_measure_estimate(const Weight& w, const Point& x, double r, BallMeasureMethod method,
                                      int budget, std::uint64_t seed) {
  if (!(r > 0.0)) throw std::invalid_argument("ball_measure: radius must be positive");
  if (w.required_dim() != 0 && w.required_dim() != x.dim()) {
    throw std::invalid_argument("ball_measure: weight dimension does not match the point");
  }
  if (method == BallMeasureMethod::automatic) method = BallMeasureMethod::quadrature;
  if (method == BallMeasureMethod::quadrature) {
    if (budget == 0) budget = 48;
    if (budget < 10) throw std::invalid_argument("ball_measure: quadrature budget must be >= 10 nodes per panel");
    return {cap_quadrature(w, x, r, budget), 0.0};
  }
  if (budget == 0) budget = 20000;
  if (budget < 100) throw std::invalid_argument("ball_measure: budget must be >= 100");
  return cap_montecarlo(w, x, r, budget, seed);
}

double ball_measure(const Weight& w, const Point& x, double r, BallMeasureMethod method, int budget) {
  return ball_measure_estimate(w, x, r, method, budget).value;
}

DoublingReport doubling_estimate(const Weight& w, int dim, int sample_count, std::uint64_t seed,
                                 int grid_size) {
  if (sample_count < 10) throw std::invalid_argument("doubling_estimate: sample_count must be >= 10");
  if (grid_size <= 0) grid_size = default_grid_size(dim);
  const std::vector<Point> grid = ball_grid(dim, grid_size);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, grid.size() - 1);
  std::uniform_real_distribution<double> logr(std::log(1e-3), std::log(kPi));
  DoublingReport rep;
  rep.sample_count = sample_count;
  rep.estimated_L = 1.0;
  rep.worst_x = grid.front();
  for (int s = 0; s < sample_count; ++s) {
    const Point& x = grid[pick(rng)];
    const double r = std::exp(logr(rng));
    const double small = ball_measure(w, x, r, BallMeasureMethod::quadrature, 32);
    const double big = ball_measure(w, x, 2.0 * r, BallMeasureMethod::quadrature, 32);
    const double ratio = small > 0.0 ? big / small : 1.0;
    if (ratio > rep.estimated_L) {
      rep.estimated_L = ratio;
      rep.worst_x = x;
      rep.worst_r = r;
    }
    rep.running_max.push_back(rep.estimated_L);
  }
  rep.estimated_s_w = std::log2(rep.estimated_L);
  return rep;
}

double cal_W(double mu, int n, const Point& x) {
  if (n < 1) throw std::invalid_argument("cal_W: n must be >= 1");
  if (mu == 0.0) return 1.0;
  return std::pow(x.height() + 1.0 / n, 2.0 * mu);
}

MollifiedWeight::MollifiedWeight(Weight w, int n, int budget) : w_(std::move(w)), n_(n), budget_(budget) {
  if (n < 1) throw std::invalid_argument("mollified weight: n must be >= 1");
}

double MollifiedWeight::operator()(const Point& x) const {
  std::vector<double> key(x.coords().begin(), x.coords().end());
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const double r = 1.0 / n_;
  double value = 1.0;
  if (!(w_.kind() == Weight::Kind::jacobi && w_.mu() == 0.5)) {
    const double num = ball_measure(w_, x, r, BallMeasureMethod::quadrature, budget_);
    const double den = ball_measure(Weight::jacobi(0.5), x, r, BallMeasureMethod::quadrature, budget_);
    value = num / den;
  }
  std::lock_guard<std::mutex> lock(mu_);
  cache_.emplace(std::move(key), value);
  return value;
}

double mollified_weight(const Weight& w, int n, const Point& x) { return MollifiedWeight(w, n)(x); }

}  // namespace mball
