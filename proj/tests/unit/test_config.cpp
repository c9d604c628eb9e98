#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mball/config.hpp"
#include "mball/experiment.hpp"
#include "mball/markov.hpp"

using namespace mball;

TEST(Config, ParsesLineFormat) {
  const ExperimentConfig c = parse_config("experiment = worst\nweight = jacobi:mu=1.0\nn = 2..16\np = 2\n");
  EXPECT_EQ(c.kind, ExperimentKind::worst);
  EXPECT_EQ(c.weight, Weight::jacobi(1.0));
  ASSERT_EQ(c.n_values.size(), 15u);
  EXPECT_EQ(c.n_values.front(), 2);
  EXPECT_EQ(c.n_values.back(), 16);
  EXPECT_EQ(c.p, 2.0);
}

TEST(Config, CommentsListsAndRanges) {
  const ExperimentConfig c = parse_config("# header\n\nexperiment = christoffel  # trailing\nn = 4, 8,16\n");
  EXPECT_EQ(c.n_values, (std::vector<int>{4, 8, 16}));
  const ExperimentConfig d = parse_config("n_min = 3\nn_max = 5\n");
  EXPECT_EQ(d.n_values, (std::vector<int>{3, 4, 5}));
}

TEST(Config, JsonObject) {
  const ExperimentConfig c =
      parse_config(R"({"experiment": "average", "weight": "product:g=0.5,0.5;mu=0.5", "n": "2..4", "samples": 500})");
  EXPECT_EQ(c.kind, ExperimentKind::average);
  EXPECT_EQ(c.samples, 500);
  EXPECT_EQ(c.weight, Weight::product({0.5, 0.5}, 0.5));
}

TEST(Config, ErrorsNameLineAndKey) {
  auto expect_error = [](const std::string& text, int line, const std::string& key) {
    try {
      parse_config(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.line(), line) << text;
      EXPECT_EQ(e.key(), key) << text;
    }
  };
  expect_error("weight = jacobi:mu=-1\n", 1, "weight");
  expect_error("n = 2..4\ncolour = red\n", 2, "colour");
  expect_error("p = 2\np = 3\n", 2, "p");
  expect_error("p = 0.5\n", 1, "p");
  expect_error("\n\nsamples = many\n", 3, "samples");
  expect_error("n = 5..2\n", 1, "n");
  expect_error("dimension = 4\n", 1, "dimension");
  expect_error("experiment = plot\n", 1, "experiment");
  expect_error("weight = product:g=0.5,0.5;mu=0.5\ndimension = 3\n", 1, "weight");
  expect_error("{\"colour\": 1}", 1, "colour");
  EXPECT_THROW(parse_config("just text\n"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
}

TEST(Config, RoundTripGenerated) {
  std::mt19937_64 rng(17);
  const char* weights[] = {"jacobi:mu=0", "jacobi:mu=0.5", "jacobi:mu=2.25", "step:a=0.3;c=7", "product:g=0.5,1;mu=1"};
  for (int t = 0; t < 200; ++t) {
    ExperimentConfig c;
    c.kind = static_cast<ExperimentKind>(rng() % 8);
    c.weight = Weight::parse(weights[rng() % 5]);
    c.dimension = c.weight.required_dim() ? c.weight.required_dim() : 2 + static_cast<int>(rng() % 2);
    c.n_values.clear();
    const int len = 1 + static_cast<int>(rng() % 5);
    int n = static_cast<int>(rng() % 10);
    for (int i = 0; i < len; ++i) c.n_values.push_back(n += 1 + static_cast<int>(rng() % 3));
    c.p = 1.0 + std::uniform_real_distribution<double>(0, 5)(rng);
    c.samples = 100 + static_cast<int>(rng() % 5000);
    c.seed = rng() % 1000000;
    c.restarts = static_cast<int>(rng() % 9);
    c.sigma = std::uniform_real_distribution<double>(0.1, 20)(rng);
    if (rng() % 2) c.out = "results/run" + std::to_string(t);
    c.budget = (rng() % 2) ? 0 : 10 + static_cast<int>(rng() % 100);
    const ExperimentConfig back = parse_config(serialize(c));
    ASSERT_EQ(back, c) << serialize(c);
    ASSERT_EQ(config_hash(back), config_hash(c));
  }
}

TEST(Config, HashDiffersOnChange) {
  ExperimentConfig a;
  ExperimentConfig b = a;
  b.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash_hex(a).size(), 16u);
}

TEST(Experiment, WorstRowsAndHash) {
  ExperimentConfig c = parse_config("experiment = worst\nweight = jacobi:mu=0.5\nn = 2..6\np = 2\n");
  const ExperimentRecord r = run(c);
  ASSERT_EQ(r.rows.size(), 5u);
  EXPECT_EQ(r.hash, config_hash_hex(c));
  std::istringstream is(r.csv());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "n,p,weight,method,value,stderr,config_hash");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), r.hash);
  }
  EXPECT_EQ(rows, 5);
  const double v4 = worst_l2(markov_setup(4, Weight::jacobi(0.5), 2)).value;
  EXPECT_NE(r.csv().find(std::to_string(4) + ",2,jacobi:mu=0.5,eigen-exact,"), std::string::npos);
  EXPECT_GT(v4, 0.0);
}

TEST(Experiment, DeterministicCsv) {
  const ExperimentConfig c = parse_config("experiment = average\nweight = jacobi:mu=1\nn = 2..4\nsamples = 300\n");
  RunOptions one, four;
  four.threads = 4;
  EXPECT_EQ(run(c, one).csv(), run(c, one).csv());
  EXPECT_EQ(run(c, one).csv(), run(c, four).csv());
  RunOptions seeded;
  seeded.seed = 5;
  EXPECT_NE(run(c, one).csv(), run(c, seeded).csv());
}

TEST(Experiment, FitSquares) {
  const auto dir = std::filesystem::temp_directory_path() / "mball_fit_test";
  std::filesystem::create_directories(dir);
  const auto csv = dir / "pts.csv";
  {
    std::ofstream out(csv);
    out << "n,value\n";
    for (int n = 2; n <= 10; ++n) out << n << "," << n * n << "\n";
  }
  ExperimentConfig c;
  c.kind = ExperimentKind::fit;
  c.input = csv.string();
  const ExperimentRecord r = run(c);
  ASSERT_FALSE(r.metrics.empty());
  EXPECT_EQ(r.metrics[0].first, "slope");
  EXPECT_NEAR(r.metrics[0].second, 2.0, 1e-12);
  write_outputs(r, (dir / "out").string());
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "fit.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "fit.summary.json"));
}

TEST(Experiment, SelftestPasses) {
  ExperimentConfig c;
  c.kind = ExperimentKind::selftest;
  const ExperimentRecord r = run(c);
  EXPECT_TRUE(r.passed());
  EXPECT_GE(r.rows.size(), 8u);
}

TEST(Experiment, KernelCheckNeedsJacobi) {
  ExperimentConfig c;
  c.kind = ExperimentKind::kernel_check;
  c.weight = Weight::radial_step(0.5, 2);
  c.n_values = {2};
  EXPECT_THROW(run(c), std::runtime_error);
}
