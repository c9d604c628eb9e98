#include "mball/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mball {

namespace {

const std::map<std::string, ExperimentKind>& kind_table() {
  static const std::map<std::string, ExperimentKind> t{
      {"worst", ExperimentKind::worst},         {"average", ExperimentKind::average},
      {"christoffel", ExperimentKind::christoffel}, {"kernel-check", ExperimentKind::kernel_check},
      {"needle", ExperimentKind::needle},       {"basis", ExperimentKind::basis},
      {"fit", ExperimentKind::fit},             {"selftest", ExperimentKind::selftest}};
  return t;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

long long parse_int(const std::string& v, int line, const std::string& key) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(line, key, "expected an integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& v, int line, const std::string& key) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(line, key, "expected a number, got '" + v + "'");
  }
  return out;
}

std::vector<int> parse_n(const std::string& v, int line) {
  std::vector<int> out;
  const auto dots = v.find("..");
  if (dots != std::string::npos) {
    const long long a = parse_int(trim(v.substr(0, dots)), line, "n");
    const long long b = parse_int(trim(v.substr(dots + 2)), line, "n");
    if (a > b) throw ConfigError(line, "n", "empty range '" + v + "'");
    for (long long k = a; k <= b; ++k) out.push_back(static_cast<int>(k));
  } else {
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(parse_int(trim(item), line, "n")));
  }
  if (out.empty()) throw ConfigError(line, "n", "empty degree list");
  for (int n : out) {
    if (n < 0 || n > 200) throw ConfigError(line, "n", "degree " + std::to_string(n) + " outside [0, 200]");
  }
  return out;
}

struct Builder {
  ExperimentConfig c;
  std::map<std::string, int> seen;
  std::optional<int> n_min, n_max;
  int n_line = 0;

  void set(const std::string& key, const std::string& value, int line) {
    if (seen.count(key)) throw ConfigError(line, key, "duplicate key (first on line " + std::to_string(seen[key]) + ")");
    seen[key] = line;
    if (key == "experiment") {
      const auto it = kind_table().find(value);
      if (it == kind_table().end()) throw ConfigError(line, key, "unknown experiment '" + value + "'");
      c.kind = it->second;
    } else if (key == "dimension") {
      const long long d = parse_int(value, line, key);
      if (d != 2 && d != 3) throw ConfigError(line, key, "dimension must be 2 or 3");
      c.dimension = static_cast<int>(d);
    } else if (key == "weight") {
      try {
        c.weight = Weight::parse(value);
      } catch (const std::exception& e) {
        throw ConfigError(line, key, e.what());
      }
    } else if (key == "n") {
      c.n_values = parse_n(value, line);
      n_line = line;
    } else if (key == "n_min") {
      n_min = static_cast<int>(parse_int(value, line, key));
    } else if (key == "n_max") {
      n_max = static_cast<int>(parse_int(value, line, key));
    } else if (key == "p") {
      c.p = parse_real(value, line, key);
      if (!(c.p >= 1.0)) throw ConfigError(line, key, "p must be >= 1");
    } else if (key == "samples") {
      const long long s = parse_int(value, line, key);
      if (s < 1 || s > 100000000) throw ConfigError(line, key, "samples out of range");
      c.samples = static_cast<int>(s);
    } else if (key == "seed") {
      const long long s = parse_int(value, line, key);
      if (s < 0) throw ConfigError(line, key, "seed must be >= 0");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "restarts") {
      const long long r = parse_int(value, line, key);
      if (r < 0 || r > 10000) throw ConfigError(line, key, "restarts out of range");
      c.restarts = static_cast<int>(r);
    } else if (key == "sigma") {
      c.sigma = parse_real(value, line, key);
      if (!(c.sigma > 0.0)) throw ConfigError(line, key, "sigma must be > 0");
    } else if (key == "out") {
      c.out = value;
    } else if (key == "budget") {
      const long long b = parse_int(value, line, key);
      if (b != 0 && (b < 10 || b > 4096)) throw ConfigError(line, key, "budget must be 0 or in [10, 4096]");
      c.budget = static_cast<int>(b);
    } else if (key == "input") {
      c.input = value;
    } else {
      throw ConfigError(line, key, "unknown key");
    }
  }

  ExperimentConfig finish() {
    if (n_min || n_max) {
      if (n_line) throw ConfigError(n_line, "n", "use either n or n_min/n_max");
      if (!n_min || !n_max) throw ConfigError(0, n_min ? "n_max" : "n_min", "n_min and n_max go together");
      c.n_values = parse_n(std::to_string(*n_min) + ".." + std::to_string(*n_max), seen.at("n_min"));
    }
    if (c.weight.required_dim() != 0 && c.weight.required_dim() != c.dimension) {
      throw ConfigError(seen.count("weight") ? seen["weight"] : 0, "weight",
                        "weight has " + std::to_string(c.weight.required_dim()) + " exponents but dimension is " +
                            std::to_string(c.dimension));
    }
    return c;
  }
};

int line_of(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

}  // namespace

const char* to_string(ExperimentKind k) {
  for (const auto& [name, kind] : kind_table()) {
    if (kind == k) return name.c_str();
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  const auto it = kind_table().find(s);
  if (it == kind_table().end()) throw ConfigError(0, "experiment", "unknown experiment '" + s + "'");
  return it->second;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return kind == o.kind && dimension == o.dimension && weight == o.weight && n_values == o.n_values && p == o.p &&
         samples == o.samples && seed == o.seed && restarts == o.restarts && sigma == o.sigma && out == o.out &&
         budget == o.budget && input == o.input;
}

ExperimentConfig parse_config(const std::string& text) {
  Builder b;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(0, "", std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError(0, "", "JSON config must be an object");
    for (const auto& [key, val] : j.items()) {
      std::string v;
      if (val.is_string()) {
        v = val.get<std::string>();
      } else if (val.is_number_integer()) {
        v = std::to_string(val.get<long long>());
      } else if (val.is_number()) {
        v = format_double(val.get<double>());
      } else {
        throw ConfigError(line_of(text, key), key, "value must be a string or a number");
      }
      b.set(key, v, line_of(text, key));
    }
    return b.finish();
  }
  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "", "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "", "missing key");
    if (value.empty()) throw ConfigError(line, key, "missing value");
    b.set(key, value, line);
  }
  return b.finish();
}

std::string serialize(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "experiment = " << to_string(c.kind) << '\n';
  os << "dimension = " << c.dimension << '\n';
  os << "weight = " << c.weight.to_string() << '\n';
  bool contiguous = c.n_values.size() > 1;
  for (size_t i = 1; i < c.n_values.size(); ++i) contiguous = contiguous && c.n_values[i] == c.n_values[i - 1] + 1;
  os << "n = ";
  if (contiguous) {
    os << c.n_values.front() << ".." << c.n_values.back();
  } else {
    for (size_t i = 0; i < c.n_values.size(); ++i) os << (i ? "," : "") << c.n_values[i];
  }
  os << '\n';
  os << "p = " << format_double(c.p) << '\n';
  os << "samples = " << c.samples << '\n';
  os << "seed = " << c.seed << '\n';
  os << "restarts = " << c.restarts << '\n';
  os << "sigma = " << format_double(c.sigma) << '\n';
  if (!c.out.empty()) os << "out = " << c.out << '\n';
  os << "budget = " << c.budget << '\n';
  if (!c.input.empty()) os << "input = " << c.input << '\n';
  return os.str();
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash_hex(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(c)));
  return buf;
}

}  // namespace mball
