#include "mball/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "mball/christoffel.hpp"
#include "mball/defaults.hpp"
#include "mball/diagnostics.hpp"
#include "mball/errors.hpp"
#include "mball/geometry.hpp"
#include "mball/kernels.hpp"
#include "mball/markov.hpp"
#include "mball/polyspace.hpp"
#include "mball/quadrature.hpp"
#include "mball/random.hpp"
#include "mball/weights.hpp"

namespace mball {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string num(int v) { return std::to_string(v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers; the first
/// exception is rethrown after all workers stop.
template <class F>
void parallel_for(int count, int threads, F body) {
  threads = std::clamp(threads, 1, std::max(count, 1));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Check window_check(const std::string& name, double value, double lo, double hi, bool asserted) {
  return Check{name, value, lo, hi, value >= lo && value <= hi, asserted};
}

/// max / min of positive values (inf when some value is not positive).
double spread(const std::vector<double>& v) {
  if (v.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
}

std::optional<ExponentFit> fit_positive(const std::vector<std::pair<double, double>>& pts) {
  std::vector<std::pair<double, double>> use;
  for (const auto& [n, v] : pts) {
    if (n >= 1.0 && v > 0.0) use.emplace_back(n, v);
  }
  if (use.size() < 3) return std::nullopt;
  return exponent_fit(use);
}

double jacobi_mu_or_throw(const Weight& w, const char* kind) {
  if (w.kind() != Weight::Kind::jacobi) {
    throw std::invalid_argument(std::string(kind) + " needs a jacobi weight, got " + w.to_string());
  }
  return w.mu();
}

void run_worst(ExperimentRecord& rec, const RunOptions& opt) {
  const ExperimentConfig& c = rec.config;
  rec.header = {"n", "p", "weight", "method", "value", "stderr"};
  const int count = static_cast<int>(c.n_values.size());
  std::vector<WorstCaseResult> res(count);
  parallel_for(count, opt.threads, [&](int i) {
    const int n = c.n_values[i];
    if (c.p == 2.0) {
      res[i] = worst_l2(markov_setup(n, c.weight, c.dimension));
    } else {
      res[i] = worst_lp(n, c.p, c.weight, c.dimension, WorstLpOptions{c.restarts, c.seed, 300});
    }
  });
  std::vector<std::pair<double, double>> pts;
  std::vector<double> over_n2;
  bool monotone = true;
  for (int i = 0; i < count; ++i) {
    const int n = c.n_values[i];
    rec.rows.push_back({num(n), num(c.p), csv_field(c.weight.to_string()), to_string(res[i].method),
                        num(res[i].value), "0"});
    pts.emplace_back(n, res[i].value);
    if (n >= 1) over_n2.push_back(res[i].value / (static_cast<double>(n) * n));
    if (c.p == 2.0 && i > 0 && n > c.n_values[i - 1] && res[i].value < res[i - 1].value * (1.0 - 1e-10)) {
      monotone = false;
    }
  }
  if (c.p == 2.0) rec.checks.push_back(Check{"monotone_in_n", monotone ? 1.0 : 0.0, 1.0, 1.0, monotone, true});
  if (const auto fit = fit_positive(pts)) {
    rec.metrics.emplace_back("slope", fit->slope);
    rec.metrics.emplace_back("intercept", fit->intercept);
    rec.metrics.emplace_back("max_residual", fit->max_residual);
    rec.checks.push_back(
        window_check("slope", fit->slope, Thresholds::worst_slope_lo, Thresholds::worst_slope_hi, false));
  }
  if (!over_n2.empty()) {
    rec.metrics.emplace_back("ratio_spread", spread(over_n2));
    rec.checks.push_back(window_check("ratio_spread", spread(over_n2), 1.0, Thresholds::worst_ratio_spread, false));
  }
}

void run_average(ExperimentRecord& rec, const RunOptions& opt) {
  const ExperimentConfig& c = rec.config;
  if (c.samples < 100) throw std::invalid_argument("average needs samples >= 100");
  rec.header = {"n", "p", "weight", "method", "value", "stderr"};
  std::vector<std::pair<double, double>> pts;
  double worst_gap = 0.0;
  double ratio_lo = std::numeric_limits<double>::infinity();
  double ratio_hi = 0.0;
  for (int n : c.n_values) {
    if (n < 1) throw std::invalid_argument("average needs n >= 1");
    const MarkovSetup s = markov_setup(n, c.weight, c.dimension);
    const AverageCaseResult mc = average_monte_carlo(s, c.sigma, c.samples, c.seed, opt.threads);
    const TraceResult tr = trace_formula(s);
    const std::string w = csv_field(c.weight.to_string());
    rec.rows.push_back({num(n), num(c.p), w, "monte-carlo", num(mc.monte_carlo_mean), num(mc.monte_carlo_stderr)});
    rec.rows.push_back({num(n), num(c.p), w, "trace-formula", num(tr.value), "0"});
    pts.emplace_back(n, mc.monte_carlo_mean);
    worst_gap = std::max(worst_gap, tr.max_relative_gap);
    const double r = tr.value / mc.monte_carlo_mean;
    ratio_lo = std::min(ratio_lo, r);
    ratio_hi = std::max(ratio_hi, r);
  }
  rec.metrics.emplace_back("trace_identity_gap", worst_gap);
  rec.checks.push_back(window_check("trace_identity_gap", worst_gap, 0.0, Thresholds::trace_identity, true));
  if (const auto fit = fit_positive(pts)) {
    rec.metrics.emplace_back("slope", fit->slope);
    rec.metrics.emplace_back("intercept", fit->intercept);
    rec.metrics.emplace_back("max_residual", fit->max_residual);
    rec.checks.push_back(window_check("slope", fit->slope, -std::numeric_limits<double>::infinity(),
                                      Thresholds::average_slope_max, false));
  }
  rec.metrics.emplace_back("trace_over_mc_min", ratio_lo);
  rec.metrics.emplace_back("trace_over_mc_max", ratio_hi);
  rec.checks.push_back(window_check("trace_over_mc_min", ratio_lo, Thresholds::trace_ratio_lo,
                                    Thresholds::trace_ratio_hi, false));
  rec.checks.push_back(window_check("trace_over_mc_max", ratio_hi, Thresholds::trace_ratio_lo,
                                    Thresholds::trace_ratio_hi, false));
}

void run_christoffel(ExperimentRecord& rec) {
  const ExperimentConfig& c = rec.config;
  rec.header = {"n", "p", "x_norm", "lambda", "ball_measure", "ratio"};
  const ChristoffelScan scan = christoffel_scan(c.weight, c.p, c.n_values, c.dimension);
  bool positive = true;
  int unconverged = 0;
  for (const ChristoffelRow& r : scan.rows) {
    rec.rows.push_back({num(r.n), num(c.p), num(r.x.norm()), num(r.lambda), num(r.ball_measure), num(r.ratio)});
    positive = positive && r.lambda > 0.0 && std::isfinite(r.ratio);
    if (!r.converged) ++unconverged;
  }
  rec.checks.push_back(Check{"lambda_positive", positive ? 1.0 : 0.0, 1.0, 1.0, positive, true});
  const double window = scan.window();
  const double limit = c.p == 2.0 ? Thresholds::christoffel_window_l2 : Thresholds::christoffel_window_l1;
  rec.metrics.emplace_back("window", window);
  rec.metrics.emplace_back("unconverged_cells", unconverged);
  rec.checks.push_back(window_check("window", window, 1.0, limit, false));
}

double kernel_sum_gap(int n, double mu, int dim, std::uint64_t seed) {
  const OrthoBasis basis = orthonormal_basis(2 * n - 1, Weight::jacobi(mu), dim);
  std::vector<Point> pts = random_ball_points(dim, 6, seed + 7);
  pts.push_back(Point::axis(dim, 0, 1.0));
  double scale = 0.0;
  double gap = 0.0;
  for (size_t a = 0; a < pts.size(); ++a) {
    for (size_t b = a; b < pts.size(); ++b) {
      const double g = Ln_kernel(n, mu, pts[a], pts[b]).value;
      const double s = Ln_kernel_basis(basis, n, pts[a], pts[b]).value;
      scale = std::max(scale, std::abs(s));
      gap = std::max(gap, std::abs(g - s));
    }
  }
  return gap / scale;
}

void run_kernel_check(ExperimentRecord& rec, const RunOptions& opt) {
  const ExperimentConfig& c = rec.config;
  const double mu = jacobi_mu_or_throw(c.weight, "kernel-check");
  const int d = c.dimension;
  const double k = d + 2;
  const int samples = std::min(c.samples, 50);
  rec.header = {"n", "mu", "check_name", "ratio", "bound_holds"};
  struct Cell {
    std::string name;
    double ratio;
    double bound;
    bool asserted;
    bool bounded_over_n;
  };
  const int count = static_cast<int>(c.n_values.size());
  std::vector<std::vector<Cell>> cells(count);
  parallel_for(count, opt.threads, [&](int i) {
    const int n = c.n_values[i];
    if (n < 1) throw std::invalid_argument("kernel-check needs n >= 1");
    auto& out = cells[i];
    const ReproducingReport rep = reproducing_residual(n, mu, d, 20, c.seed);
    out.push_back({"reproducing", rep.value_residual, Thresholds::reproducing, true, false});
    out.push_back({"reproducing_derivative", rep.derivative_residual, Thresholds::reproducing_derivative, true, false});
    if (n <= 10) out.push_back({"kernel_sum", kernel_sum_gap(n, mu, d, c.seed), Thresholds::kernel_sum, true, false});
    out.push_back({"derivative_bound", derivative_kernel_ratio(n, mu, d, k, samples, c.seed),
                   Thresholds::diagnostic_ceiling, false, true});
    out.push_back({"lipschitz", lipschitz_ratio(n, mu, d, 1.0, k, samples, c.seed), Thresholds::diagnostic_ceiling,
                   false, true});
    out.push_back({"l1_growth", l1_growth(n, mu, d, 8, c.seed), Thresholds::diagnostic_ceiling, false, true});
    const double sigma = d / c.p + 2.0 * mu * std::abs(1.0 / c.p - 0.5) + 1.0;
    const JpResult jp = Jp_integral(n, mu, c.p, sigma, Point::axis(d, 0, 0.9));
    out.push_back({"jp_ratio", jp.ratio, Thresholds::diagnostic_ceiling, false, true});
    out.push_back({"jp_budget_change", jp.budget_change, 1e-6, true, false});
  });
  std::map<std::string, std::vector<double>> per_check;
  std::vector<std::string> order;
  for (int i = 0; i < count; ++i) {
    for (const Cell& cell : cells[i]) {
      const bool holds = cell.ratio <= cell.bound;
      rec.rows.push_back({num(c.n_values[i]), num(mu), cell.name, num(cell.ratio), holds ? "1" : "0"});
      if (cell.asserted) rec.checks.push_back(window_check(cell.name + "_n" + num(c.n_values[i]), cell.ratio, 0.0, cell.bound, true));
      if (cell.bounded_over_n) {
        if (!per_check.count(cell.name)) order.push_back(cell.name);
        per_check[cell.name].push_back(cell.ratio);
      }
    }
  }
  for (const std::string& name : order) {
    const double s = spread(per_check[name]);
    const double limit = name == "l1_growth" ? Thresholds::l1_growth_spread : Thresholds::bounded_over_n;
    rec.metrics.emplace_back(name + "_spread", s);
    rec.checks.push_back(window_check(name + "_spread", s, 1.0, limit, false));
  }
}

void run_needle(ExperimentRecord& rec, const RunOptions& opt) {
  const ExperimentConfig& c = rec.config;
  const int d = c.dimension;
  const DoublingReport dbl = doubling_estimate(c.weight, d, std::clamp(c.samples, 10, 400), c.seed);
  const double k = dbl.estimated_s_w + d + 1.0;
  rec.metrics.emplace_back("doubling_L", dbl.estimated_L);
  rec.metrics.emplace_back("s_w", dbl.estimated_s_w);
  rec.metrics.emplace_back("k", k);
  rec.header = {"n", "p", "k", "m", "n1", "min_value", "c_lo", "c_hi", "window", "status"};
  const int count = static_cast<int>(c.n_values.size());
  std::vector<std::optional<NeedleResult>> res(count);
  std::vector<std::string> status(count, "ok");
  parallel_for(count, opt.threads, [&](int i) {
    try {
      NeedleOptions no;
      no.nodes_per_panel = c.budget;
      res[i] = needle_polynomial(Point::origin(d), c.n_values[i], c.p, k, no);
    } catch (const std::invalid_argument& e) {
      status[i] = "precondition";
    }
  });
  double worst_window = 0.0;
  double min_value = std::numeric_limits<double>::infinity();
  int skipped = 0;
  for (int i = 0; i < count; ++i) {
    const int n = c.n_values[i];
    if (!res[i]) {
      ++skipped;
      rec.rows.push_back({num(n), num(c.p), num(k), "", "", "", "", "", "", status[i]});
      continue;
    }
    const NeedleResult& r = *res[i];
    const double window = std::max(r.window_upper(), r.window_lower());
    worst_window = std::max(worst_window, window);
    min_value = std::min(min_value, r.min_value);
    rec.rows.push_back({num(n), num(c.p), num(k), num(r.m), num(r.n1), num(r.min_value), num(r.c_lo), num(r.c_hi),
                        num(window), status[i]});
  }
  rec.metrics.emplace_back("precondition_failures", skipped);
  rec.checks.push_back(window_check("precondition_failures", skipped, 0.0, 0.0, false));
  if (skipped < count) {
    rec.metrics.emplace_back("min_value", min_value);
    rec.metrics.emplace_back("window", worst_window);
    rec.checks.push_back(window_check("min_value", min_value, Thresholds::needle_nonnegative,
                                      std::numeric_limits<double>::infinity(), true));
    rec.checks.push_back(window_check("window", worst_window, 1.0, Thresholds::needle_window, false));
  }
}

void run_basis(ExperimentRecord& rec) {
  const ExperimentConfig& c = rec.config;
  const int n = *std::max_element(c.n_values.begin(), c.n_values.end());
  const OrthoBasis basis = orthonormal_basis(n, c.weight, c.dimension);
  std::ostringstream os;
  write_basis_csv(os, basis);
  std::istringstream is(os.str());
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (first) {
      rec.header = split_csv_line(line);
      first = false;
    } else {
      rec.rows.push_back(split_csv_line(line));
    }
  }
  rec.metrics.emplace_back("degree", n);
  rec.metrics.emplace_back("size", basis.size());
  rec.metrics.emplace_back("worst_condition", basis.worst_condition);
  rec.checks.push_back(window_check("gram_residual", basis.gram_residual, 0.0, 1e-8, true));
}

void run_fit(ExperimentRecord& rec) {
  const ExperimentConfig& c = rec.config;
  if (c.input.empty()) throw ConfigError(0, "input", "fit needs an input CSV");
  std::ifstream in(c.input);
  if (!in) throw std::runtime_error("cannot open fit input '" + c.input + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("fit input '" + c.input + "' is empty");
  const std::vector<std::string> head = split_csv_line(line);
  const auto col = [&](const std::string& name) {
    const auto it = std::find(head.begin(), head.end(), name);
    if (it == head.end()) throw std::runtime_error("fit input has no '" + name + "' column");
    return static_cast<size_t>(it - head.begin());
  };
  const size_t cn = col("n");
  const size_t cv = col("value");
  std::vector<std::pair<double, double>> pts;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() <= std::max(cn, cv)) throw std::runtime_error("fit input line " + std::to_string(line_no) + ": too few columns");
    try {
      pts.emplace_back(std::stod(f[cn]), std::stod(f[cv]));
    } catch (const std::exception&) {
      throw std::runtime_error("fit input line " + std::to_string(line_no) + ": not a number");
    }
  }
  const ExponentFit fit = exponent_fit(pts);
  rec.header = {"n", "value", "fitted"};
  for (const auto& [n, v] : pts) {
    rec.rows.push_back({num(n), num(v), num(std::exp(fit.intercept + fit.slope * std::log(n)))});
  }
  rec.metrics.emplace_back("slope", fit.slope);
  rec.metrics.emplace_back("intercept", fit.intercept);
  rec.metrics.emplace_back("max_residual", fit.max_residual);
}

void run_selftest(ExperimentRecord& rec) {
  rec.header = {"module", "check", "value", "tolerance", "passed"};
  const std::uint64_t seed = rec.config.seed;
  auto add = [&](const std::string& module, const std::string& check, double value, double tol) {
    const bool ok = std::abs(value) <= tol;
    rec.rows.push_back({module, check, num(value), num(tol), ok ? "1" : "0"});
    rec.checks.push_back(Check{module + "." + check, value, -tol, tol, ok, true});
  };
  {
    const std::vector<Point> a = random_ball_points(2, 1000, seed);
    const std::vector<Point> b = random_ball_points(2, 1000, seed + 1);
    double gap = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      gap = std::max(gap, std::abs(dist_tilde(a[i], b[i]) - 2.0 * std::sin(dist(a[i], b[i]) / 2.0)));
    }
    add("geometry", "chord_identity", gap, Thresholds::chord_identity);
  }
  add("weights", "disk_area", ball_measure(Weight::jacobi(0.5), Point{0.3, 0.1}, std::numbers::pi) - std::numbers::pi,
      1e-10);
  {
    const QuadratureRule r = gauss_jacobi_1d(10, 0.3, -0.2);
    const double exact = std::pow(2.0, 1.1) * std::beta(1.3, 0.8);
    add("quadrature", "gauss_jacobi_mass", r.total_weight() / exact - 1.0, 1e-12);
  }
  {
    const OrthoBasis basis = orthonormal_basis(8, Weight::jacobi(0.5), 2);
    const QuadratureRule rule = ball_rule(20, 0.5, 2);
    const Eigen::MatrixXd V = basis.eval_nodes(rule);
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), rule.size());
    const Eigen::MatrixXd G = V.transpose() * w.asDiagonal() * V;
    add("polyspace", "gram_identity", (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff(), 1e-10);
  }
  add("kernels", "kernel_sum", kernel_sum_gap(3, 0.5, 2, seed), Thresholds::kernel_sum);
  {
    const Point x{0.3, 0.2};
    const OrthoBasis basis = orthonormal_basis(4, Weight::jacobi(0.5), 2);
    const double l2 = christoffel_l2(basis, x);
    const double var = christoffel_variational(4, Weight::jacobi(0.5), x, ball_rule(8, 0.5, 2));
    add("christoffel", "variational_match", var / l2 - 1.0, 1e-8);
  }
  {
    const MarkovSetup s = markov_setup(1, Weight::jacobi(0.5), 2);
    add("markov", "worst_l2_n1", worst_l2(s).value - 2.0, Thresholds::hand_value);
    add("markov", "trace_n1", trace_formula(s).matrix_trace[0] - 4.0, Thresholds::hand_value);
  }
  add("diagnostics", "reproducing", reproducing_residual(4, 0.5, 2, 3, seed).value_residual, Thresholds::reproducing);
  {
    ExperimentConfig probe;
    probe.kind = ExperimentKind::christoffel;
    probe.weight = Weight::parse("product:g=0.5,0.25;mu=1.5");
    probe.n_values = {4, 8, 16};
    probe.p = 1.5;
    const bool same = parse_config(serialize(probe)) == probe;
    add("cli", "config_round_trip", same ? 0.0 : 1.0, 0.0);
  }
}

}  // namespace

bool ExperimentRecord::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.asserted || c.passed; });
}

std::string ExperimentRecord::csv() const {
  std::string out;
  for (size_t i = 0; i < header.size(); ++i) out += header[i] + ",";
  out += "config_hash\n";
  for (const auto& row : rows) {
    for (const auto& f : row) out += f + ",";
    out += hash + "\n";
  }
  return out;
}

std::string ExperimentRecord::summary_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = to_string(config.kind);
  j["config_hash"] = hash;
  j["config"] = config_text;
  j["thresholds_version"] = Thresholds::version;
  j["rows"] = rows.size();
  j["wall_seconds"] = wall_seconds;
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const auto& [k, v] : metrics) m[k] = v;
  j["metrics"] = m;
  nlohmann::ordered_json cs = nlohmann::ordered_json::array();
  for (const Check& c : checks) {
    cs.push_back({{"name", c.name},
                  {"value", c.value},
                  {"lo", c.lo},
                  {"hi", c.hi},
                  {"passed", c.passed},
                  {"asserted", c.asserted}});
  }
  j["checks"] = cs;
  j["passed"] = passed();
  return j.dump(2) + "\n";
}

ExperimentRecord run(const ExperimentConfig& config, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentRecord rec;
  rec.config = config;
  if (opt.seed) rec.config.seed = *opt.seed;
  rec.config_text = serialize(rec.config);
  rec.hash = config_hash_hex(rec.config);
  const ExperimentConfig& c = rec.config;
  try {
    switch (c.kind) {
      case ExperimentKind::worst: run_worst(rec, opt); break;
      case ExperimentKind::average: run_average(rec, opt); break;
      case ExperimentKind::christoffel: run_christoffel(rec); break;
      case ExperimentKind::kernel_check: run_kernel_check(rec, opt); break;
      case ExperimentKind::needle: run_needle(rec, opt); break;
      case ExperimentKind::basis: run_basis(rec); break;
      case ExperimentKind::fit: run_fit(rec); break;
      case ExperimentKind::selftest: run_selftest(rec); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(to_string(c.kind)) + ": " + e.what());
  }
  if (opt.dump_rule && c.kind != ExperimentKind::fit && c.kind != ExperimentKind::selftest) {
    for (int n : c.n_values) {
      std::ostringstream os;
      write_rule_csv(os, weight_rule(c.weight, 2 * n, c.dimension));
      rec.attachments.emplace_back("rule_n" + std::to_string(n) + ".csv", os.str());
    }
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

void write_outputs(const ExperimentRecord& rec, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir.empty() ? "." : dir);
  fs::create_directories(root);
  const std::string stem = to_string(rec.config.kind);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(root / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (root / name).string());
    out << text;
  };
  put(stem + ".csv", rec.csv());
  put(stem + ".summary.json", rec.summary_json());
  for (const auto& [name, text] : rec.attachments) put(name, text);
}

int threads_from_env(int fallback) {
  const char* v = std::getenv("MBALL_THREADS");
  if (!v || !*v) return fallback;
  int t = 0;
  const auto [ptr, ec] = std::from_chars(v, v + std::strlen(v), t);
  if (ec != std::errc() || *ptr != '\0' || t < 1) {
    throw std::invalid_argument(std::string("MBALL_THREADS must be a positive integer, got '") + v + "'");
  }
  return t;
}

}  // namespace mball
