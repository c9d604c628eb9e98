// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion was evaluated (whatever its verdict)
// and 2 when a criterion crashed. `--strict` makes any FAIL exit 1.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "../unit/oracles.hpp"
#include "mball/christoffel.hpp"
#include "mball/defaults.hpp"
#include "mball/diagnostics.hpp"
#include "mball/errors.hpp"
#include "mball/geometry.hpp"
#include "mball/kernels.hpp"
#include "mball/markov.hpp"
#include "mball/weights.hpp"

using namespace mball;
using T = Thresholds;
using std::numbers::pi;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& note) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "!! ") + note);
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt2(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double spread(const std::vector<double>& v) {
  double lo = v.front(), hi = v.front();
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return lo > 0 ? hi / lo : INFINITY;
}

// 1. Worst-case L2 exponent.
void worst_l2_exponent(Verdict& v) {
  for (double mu : {0.0, 0.5, 1.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::pair<double, double>> pts;
    std::vector<double> over;
    for (int n = 2; n <= 24; ++n) {
      const double val = worst_l2(markov_setup(n, Weight::jacobi(mu), 2)).value;
      pts.emplace_back(n, val);
      over.push_back(val / (n * n));
    }
    const double slope = exponent_fit(pts).slope;
    const double t = seconds_since(t0);
    v.require(slope >= T::worst_slope_lo && slope <= T::worst_slope_hi,
              fmt2("mu=%g slope %.4f in [1.85, 2.05]", mu, slope));
    v.require(spread(over) < T::worst_ratio_spread, fmt2("mu=%g value/n^2 spread %.3f < 10", mu, spread(over)));
    v.require(t < 120.0, fmt2("mu=%g runtime %.1fs < 120s", mu, t));
  }
}

// 2. Sharpness through the lifted univariate problem.
void sharpness(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  const double mu = 0.5;
  const int d = 2;
  for (double p : {1.0, 2.0, 4.0}) {
    std::vector<std::pair<double, double>> pts;
    for (int n : {4, 8, 16, 32, 64}) pts.emplace_back(n, lifted_lower_bound(n, p, mu, d).value);
    const double slope = exponent_fit(pts).slope;
    v.require(slope >= T::lifted_slope_lo && slope <= T::lifted_slope_hi,
              fmt2("p=%g lifted slope %.4f in [1.9, 2.1] (n = 4..64, powers of 2)", p, slope));
  }
  for (double p : {1.0, 2.0, 4.0}) {
    for (int n : {4, 8, 16}) {
      const double lifted = lifted_lower_bound(n, p, mu, d).value;
      const double worst = worst_lp(n, p, Weight::jacobi(mu), d).value;
      char buf[160];
      std::snprintf(buf, sizeof buf, "p=%g n=%d lifted %.6g <= worst_lp %.6g + 1e-6", p, n, lifted, worst);
      v.require(lifted <= worst + T::lifted_vs_worst_tol, buf);
    }
  }
  const double t = seconds_since(t0);
  v.require(t < 180.0, fmt("runtime %.1fs < 180s", t));
}

// 3. Average-case exponent and the trace equivalence.
void average_exponent(Verdict& v) {
  for (const char* spec : {"jacobi:mu=0.5", "jacobi:mu=1", "product:g=0.5,0.5;mu=0.5"}) {
    const auto t0 = std::chrono::steady_clock::now();
    const Weight w = Weight::parse(spec);
    std::vector<std::pair<double, double>> pts;
    double lo = INFINITY, hi = 0.0;
    for (int n = 2; n <= 16; ++n) {
      const MarkovSetup s = markov_setup(n, w, 2);
      const AverageCaseResult mc = average_monte_carlo(s, 1.0, 2000, 1);
      const double tr = trace_formula(s).value;
      pts.emplace_back(n, mc.monte_carlo_mean);
      lo = std::min(lo, tr / mc.monte_carlo_mean);
      hi = std::max(hi, tr / mc.monte_carlo_mean);
    }
    const double slope = exponent_fit(pts).slope;
    const double t = seconds_since(t0);
    v.require(slope <= T::average_slope_max, std::string(spec) + fmt(" slope %.4f <= 1.6", slope));
    v.require(lo >= T::trace_ratio_lo && hi <= T::trace_ratio_hi,
              std::string(spec) + fmt2(" trace/mc in [%.3f, %.3f] within [0.2, 5]", lo, hi));
    v.require(t < 300.0, std::string(spec) + fmt(" runtime %.1fs < 300s", t));
  }
}

// 4. Trace identity.
void trace_identity(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  for (const char* spec : {"jacobi:mu=0.5", "jacobi:mu=1", "product:g=0.5,0.5;mu=0.5"}) {
    double gap = 0.0;
    for (int n = 1; n <= 12; ++n) {
      try {
        gap = std::max(gap, trace_formula(markov_setup(n, Weight::parse(spec), 2)).max_relative_gap);
      } catch (const ConsistencyError& e) {
        gap = INFINITY;
      }
    }
    v.require(gap <= T::trace_identity, std::string(spec) + fmt(" max relative gap %.2e <= 1e-8", gap));
  }
  const double t = seconds_since(t0);
  v.require(t < 60.0, fmt("runtime %.1fs < 60s", t));
}

// 5. Christoffel comparability.
void christoffel(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n2[] = {4, 8, 16, 32};
  const int n1[] = {2, 4, 8};
  for (double mu : {0.0, 0.5, 2.0}) {
    const double w2 = christoffel_scan(Weight::jacobi(mu), 2.0, n2, 2).window();
    v.require(w2 < T::christoffel_window_l2, fmt2("mu=%g p=2 window %.3f < 50", mu, w2));
    const double w1 = christoffel_scan(Weight::jacobi(mu), 1.0, n1, 2).window();
    v.require(w1 < T::christoffel_window_l1, fmt2("mu=%g p=1 window %.3f < 1e3", mu, w1));
  }
  const double t = seconds_since(t0);
  v.require(t < 300.0, fmt("runtime %.1fs < 300s", t));
}

// 6. Reproducing identity and derivative representation.
void reproducing(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  for (double mu : {0.0, 0.5, 1.0}) {
    double val = 0.0, der = 0.0;
    for (int n = 1; n <= 8; ++n) {
      const ReproducingReport r = reproducing_residual(n, mu, 2, 20, 100 + n);
      val = std::max(val, r.value_residual);
      der = std::max(der, r.derivative_residual);
    }
    v.require(val < T::reproducing, fmt2("mu=%g value residual %.2e < 1e-8 |P|", mu, val));
    v.require(der < T::reproducing_derivative, fmt2("mu=%g derivative residual %.2e < 1e-7 |dP|", mu, der));
  }
  const double t = seconds_since(t0);
  v.require(t < 120.0, fmt("runtime %.1fs < 120s", t));
}

// 7. L1 growth of the kernel derivative.
void l1_growth_check(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  for (double mu : {0.5, 1.0}) {
    std::vector<double> g;
    for (int n : {4, 8, 16, 32}) g.push_back(l1_growth(n, mu, 2, 8, 7));
    v.require(spread(g) < T::l1_growth_spread,
              fmt2("mu=%g max/min of L1/n^2 %.3f < 20", mu, spread(g)) +
                  fmt2(" (range %.3f..%.3f)", *std::min_element(g.begin(), g.end()), *std::max_element(g.begin(), g.end())));
  }
  const double t = seconds_since(t0);
  v.require(t < 300.0, fmt("runtime %.1fs < 300s", t));
}

// 8. Needle polynomials.
void needle(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  const DoublingReport dbl = doubling_estimate(Weight::jacobi(0.5), 2, 200, 1);
  const double k = dbl.estimated_s_w + 2 + 1;
  v.notes.push_back(fmt2("s_w = %.4f, k = %.4f", dbl.estimated_s_w, k));
  for (int n : {8, 16, 32}) {
    try {
      const NeedleResult r = needle_polynomial(Point::origin(2), n, 1.0, k);
      const double window = std::max(r.window_upper(), r.window_lower());
      char buf[200];
      std::snprintf(buf, sizeof buf, "n=%d m=%d n1=%d min h %.3e >= -1e-9", n, r.m, r.n1, r.min_value);
      v.require(r.min_value >= T::needle_nonnegative, buf);
      std::snprintf(buf, sizeof buf, "n=%d window %.3e < 1e3 on %d points", n, window, r.grid_points);
      v.require(window < T::needle_window, buf);
    } catch (const std::invalid_argument& e) {
      v.require(false, "n=" + std::to_string(n) + " precondition: " + e.what());
    } catch (const ResolutionError& e) {
      v.require(false, "n=" + std::to_string(n) + " resolution: " + e.what());
    }
  }
  const double t = seconds_since(t0);
  v.require(t < 180.0, fmt("runtime %.1fs < 180s", t));
}

// 9. Metric and covering properties.
void metric(Verdict& v) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto x = random_ball_points(2, 10000, 31);
  const auto y = random_ball_points(2, 10000, 32);
  const auto z = random_ball_points(2, 10000, 33);
  double chord = 0.0;
  int violations = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dxy = dist(x[i], y[i]);
    chord = std::max(chord, std::abs(dist_tilde(x[i], y[i]) - 2 * std::sin(dxy / 2)));
    for (double n : {1.0, 4.0, 16.0, 64.0}) {
      if (1 + n * dxy > (1 + n * dist(x[i], z[i])) * (1 + n * dist(y[i], z[i])) * (1 + 1e-12)) ++violations;
    }
  }
  v.require(chord <= T::chord_identity, fmt("chord identity max gap %.2e <= 1e-12", chord));
  v.require(violations == 0, fmt("quasi-triangle violations %g on 1e4 triples x 4 n", violations));
  const auto probes = ball_grid(2, 10000);
  for (double eps : {pi / 4, pi / 8, pi / 16}) {
    const SeparatedSet s = maximal_separated_set(2, eps, 1);
    const CoverageReport r = check_separated_set(s, probes);
    char buf[200];
    std::snprintf(buf, sizeof buf, "eps=%.4f centers=%zu separated=%d covering=%d overlap<=%d", eps, s.centers.size(),
                  r.separated, r.covering, r.max_overlap);
    v.require(r.separated && r.covering && r.max_overlap <= 30, buf);
  }
  const double t = seconds_since(t0);
  v.require(t < 60.0, fmt("runtime %.1fs < 60s", t));
}

// 10. Hand values against brute-force monomial constructions.
void hand_values(Verdict& v) {
  const MarkovSetup s = markov_setup(1, Weight::jacobi(0.5), 2);
  const double w = worst_l2(s).value;
  const double tr = trace_formula(s).matrix_trace[0];
  const double w_oracle = oracle::worst_l2(1, 2, 0.5);
  // tr(D_1^T D_1) = trace(G^{-1} H_1) on monomials, H_1 the x_1-derivative Gram.
  const Eigen::MatrixXd G = oracle::gram(1, 2, 0.5);
  Eigen::MatrixXd H1 = Eigen::MatrixXd::Zero(3, 3);
  H1(1, 1) = oracle::jacobi_moment({0, 0}, 0.5);
  const double tr_oracle = (G.ldlt().solve(H1)).trace();
  v.require(std::abs(w_oracle - 2.0) <= T::hand_value, fmt("oracle worst = %.15f", w_oracle));
  v.require(std::abs(tr_oracle - 4.0) <= T::hand_value, fmt("oracle trace = %.15f", tr_oracle));
  v.require(std::abs(w - 2.0) <= T::hand_value, fmt("worst_l2(n=1) = %.15f", w));
  v.require(std::abs(tr - 4.0) <= T::hand_value, fmt("tr(D1^T D1) = %.15f", tr));
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  for (int i = 1; i < argc; ++i) strict = strict || std::strcmp(argv[i], "--strict") == 0;
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Verdict&)> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "worst-case L2 exponent", worst_l2_exponent},
      {2, "sharpness via lifted univariate extremals", sharpness},
      {3, "average-case exponent and trace equivalence", average_exponent},
      {4, "trace identity", trace_identity},
      {5, "Christoffel comparability", christoffel},
      {6, "reproducing identity and derivative representation", reproducing},
      {7, "kernel derivative L1 growth", l1_growth_check},
      {8, "needle polynomials", needle},
      {9, "metric and covering properties", metric},
      {10, "hand-value regression", hand_values},
  };
  std::printf("thresholds version %s\n", T::version);
  int failed = 0, crashed = 0;
  for (const Criterion& c : criteria) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
      ++crashed;
    }
    const double t = seconds_since(t0);
    std::printf("CRITERION %2d %s  %s  (%.1fs)\n", c.id, v.pass ? "PASS" : "FAIL", c.name, t);
    for (const std::string& n : v.notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  if (crashed) return 2;
  return strict && failed ? 1 : 0;
}
