#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mball/config.hpp"
#include "mball/experiment.hpp"

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;
constexpr int kRuntime = 3;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool dump_rule = false;
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config_path, "experiment config (key = value lines or JSON)");
  if (config_required) opt->required();
  opt->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "override the config seed");
  sub->add_option("--out", c.out, "output directory (default: config `out`, else .)");
  sub->add_flag("--dump-rule", c.dump_rule, "also write the quadrature rule of each n as CSV");
}

bool names_experiment(const std::string& text) {
  static const std::regex line_key(R"((^|\n)\s*experiment\s*=)");
  static const std::regex json_key(R"("experiment"\s*:)");
  return std::regex_search(text, line_key) || std::regex_search(text, json_key);
}

int execute(mball::ExperimentKind kind, const Common& common) {
  namespace fs = std::filesystem;
  mball::ExperimentConfig config;
  std::string text;
  if (!common.config_path.empty()) {
    std::ifstream in(common.config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    config = mball::parse_config(text);
    if (names_experiment(text) && config.kind != kind) {
      throw mball::ConfigError(0, "experiment",
                               std::string("config is for '") + mball::to_string(config.kind) +
                                   "' but the subcommand runs '" + mball::to_string(kind) + "'");
    }
    if (!config.input.empty() && fs::path(config.input).is_relative()) {
      config.input = (fs::path(common.config_path).parent_path() / config.input).lexically_normal().string();
    }
  }
  config.kind = kind;

  mball::RunOptions opt;
  opt.seed = common.seed;
  opt.threads = mball::threads_from_env(1);
  opt.dump_rule = common.dump_rule;

  const mball::ExperimentRecord rec = mball::run(config, opt);
  const std::string dir = !common.out.empty() ? common.out : (!config.out.empty() ? config.out : ".");
  mball::write_outputs(rec, dir);

  std::printf("%s  hash=%s  rows=%zu  %.2fs\n", mball::to_string(kind), rec.hash.c_str(), rec.rows.size(),
              rec.wall_seconds);
  for (const auto& [name, value] : rec.metrics) std::printf("  %-28s %.6g\n", name.c_str(), value);
  for (const mball::Check& c : rec.checks) {
    std::printf("  %-4s %-28s %.6g in [%.3g, %.3g]%s\n", c.passed ? "ok" : (c.asserted ? "FAIL" : "out"),
                c.name.c_str(), c.value, c.lo, c.hi, c.asserted ? "" : "  (reported)");
  }
  std::printf("  wrote %s/%s.csv\n", dir.c_str(), mball::to_string(kind));
  return rec.passed() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted polynomial experiments on the unit ball"};
  app.require_subcommand(1);
  Common common;

  auto* markov = app.add_subcommand("markov", "worst-case or average-case Markov factors");
  std::string markov_mode;
  markov->add_option("mode", markov_mode, "worst or average")->required()->check(CLI::IsMember({"worst", "average"}));
  add_common(markov, common, true);

  struct Simple {
    const char* name;
    const char* help;
    mball::ExperimentKind kind;
    bool config_required;
  };
  const Simple simple[] = {
      {"christoffel", "Christoffel function scan against w(B(x,1/n))", mball::ExperimentKind::christoffel, true},
      {"kernel-check", "reproducing and derivative kernel diagnostics", mball::ExperimentKind::kernel_check, true},
      {"basis", "orthonormal basis coefficients", mball::ExperimentKind::basis, true},
      {"needle", "needle polynomial comparability", mball::ExperimentKind::needle, true},
      {"fit", "log-log slope of an (n, value) CSV", mball::ExperimentKind::fit, true},
      {"selftest", "quick invariants of every module", mball::ExperimentKind::selftest, false},
  };
  std::vector<std::pair<CLI::App*, mball::ExperimentKind>> subs;
  for (const Simple& s : simple) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, common, s.config_required);
    subs.emplace_back(sub, s.kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (markov->parsed()) {
      return execute(markov_mode == "worst" ? mball::ExperimentKind::worst : mball::ExperimentKind::average, common);
    }
    for (const auto& [sub, kind] : subs) {
      if (sub->parsed()) return execute(kind, common);
    }
  } catch (const mball::ConfigError& e) {
    std::fprintf(stderr, "mball: config error: %s\n", e.what());
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "mball: invalid argument: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mball: %s\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
