#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "intraday/cli.hpp"
#include "intraday/io.hpp"

namespace intraday {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "intraday");
  std::vector<const char *> argv;
  for (const auto &a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out;
  std::ostringstream err;
  Outcome r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("intraday_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string &name) const { return (dir_ / name).string(); }
  std::string read(const std::string &name) const { return io::read_text(dir_ / name); }

  fs::path dir_;
};

const char kTwoComponents[] =
    R"({"format":"intraday-gmm","version":1,"horizon":2,"instances":[
{"id":"a","condition":[],"k":2,"components":[{"mean":[0,0],"cov":{"kind":"diag","sigma":[1,1]}},{"mean":[4,0],"cov":{"kind":"diag","sigma":[1,1]}}]}]}
)";

TEST_F(CliTest, HelpAndUsageErrors) {
  const Outcome help = run({"--help"});
  EXPECT_EQ(help.code, cli::kExitOk);
  for (const char *sub : {"gen", "update", "sample", "evaluate", "tune-k"}) {
    EXPECT_NE(help.out.find(sub), std::string::npos) << sub;
  }
  EXPECT_EQ(run({}).code, cli::kExitValidation);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"gen", "--out-dir", path("g")}).code, cli::kExitValidation);
  EXPECT_EQ(run({"update", "--model", path("none.json"), "--t-prime", "0"}).code,
            cli::kExitIo);
}

TEST_F(CliTest, UpdateReproducesPosteriorWeights) {
  io::write_text(dir_ / "m.json", kTwoComponents);
  io::write_text(dir_ / "p.csv", "instance_id,t1,t2\na,0,0\n");
  const Outcome prior = run({"update", "--model", path("m.json"), "--t-prime", "0"});
  ASSERT_EQ(prior.code, cli::kExitOk) << prior.err;
  EXPECT_NE(prior.out.find("\"gamma\":[0.5,0.5]"), std::string::npos) << prior.out;
  EXPECT_NE(prior.out.find("\"mean\":[4.0,0.0]"), std::string::npos) << prior.out;

  const Outcome post = run({"update", "--model", path("m.json"), "--data", path("p.csv"),
                        "--t-prime", "1"});
  ASSERT_EQ(post.code, cli::kExitOk) << post.err;
  EXPECT_NE(post.out.find("\"gamma\":[0.9996646498695336,0.00033535013046647816]"),
            std::string::npos)
      << post.out;

  const Outcome beyond = run({"update", "--model", path("m.json"), "--data", path("p.csv"),
                          "--t-prime", "2"});
  EXPECT_EQ(beyond.code, cli::kExitValidation);
  EXPECT_NE(beyond.err.find("OutOfBounds"), std::string::npos) << beyond.err;
}

TEST_F(CliTest, SampleShapes) {
  io::write_text(dir_ / "m.json", kTwoComponents);
  io::write_text(dir_ / "p.csv", "instance_id,t1,t2\na,0,0\n");
  const Outcome k = run({"sample", "--model", path("m.json"), "--seed", "4"});
  ASSERT_EQ(k.code, cli::kExitOk) << k.err;
  const auto k_ens = io::parse_ensembles(k.out);
  ASSERT_EQ(k_ens.size(), 1u);
  EXPECT_EQ(k_ens[0].size(), 2);
  EXPECT_EQ(k_ens[0].remaining(), 2);

  const Outcome one = run({"sample", "--model", path("m.json"), "--data", path("p.csv"),
                       "--t-prime", "1", "-s", "1", "--seed", "4"});
  ASSERT_EQ(one.code, cli::kExitOk) << one.err;
  const auto one_ens = io::parse_ensembles(one.out);
  EXPECT_EQ(one_ens[0].size(), 1);
  EXPECT_EQ(one_ens[0].t_prime, 1);
  EXPECT_EQ(run({"sample", "--model", path("m.json"), "--seed", "4"}).out, k.out);
  EXPECT_EQ(run({"sample", "--model", path("m.json")}).code, cli::kExitValidation);
}

TEST_F(CliTest, PipelineIsByteDeterministic) {
  const std::vector<std::string> gen_args{"gen", "--kind", "best-case", "-n", "6",
                                          "-k", "3", "--horizon", "6", "--seed", "21",
                                          "--out-dir"};
  auto gen_a = gen_args;
  gen_a.push_back(path("a"));
  auto gen_b = gen_args;
  gen_b.push_back(path("b"));
  ASSERT_EQ(run(gen_a).code, cli::kExitOk);
  ASSERT_EQ(run(gen_b).code, cli::kExitOk);
  for (const char *f : {"model.json", "profiles.csv", "conditions.csv", "labels.csv",
                        "generator.json"}) {
    EXPECT_EQ(read(std::string("a/") + f), read(std::string("b/") + f)) << f;
  }

  std::vector<std::string> outputs;
  for (const char *threads : {"1", "3"}) {
    const std::string grid = path(std::string("grid") + threads + ".csv");
    const Outcome ev = run({"evaluate", "--model", path("a/model.json"), "--data",
                        path("a/profiles.csv"), "--tag", "best_case", "--seed", "5",
                        "--threads", threads, "--grid", grid});
    ASSERT_EQ(ev.code, cli::kExitOk) << ev.err;
    outputs.push_back(ev.out + io::read_text(grid));
  }
  EXPECT_EQ(outputs[0], outputs[1]);
  const auto traces = io::parse_traces(outputs[0].substr(0, outputs[0].find("variant,t_prime")));
  EXPECT_EQ(traces.size(), 10u);

  const Outcome tune1 = run({"tune-k", "--k-grid", "2,4", "-n", "8", "--horizon", "5",
                         "--seed", "3", "--threads", "1"});
  const Outcome tune3 = run({"tune-k", "--k-grid", "2,4", "-n", "8", "--horizon", "5",
                         "--seed", "3", "--threads", "3"});
  ASSERT_EQ(tune1.code, cli::kExitOk) << tune1.err;
  EXPECT_EQ(tune1.out, tune3.out);
  EXPECT_EQ(io::parse_tuning_report(tune1.out).k_grid, (std::vector<std::size_t>{2, 4}));
}

TEST_F(CliTest, BadInputsMapToExitCodes) {
  io::write_text(dir_ / "m.json", "{\"format\":\"intraday-gmm\",\"version\":9}");
  EXPECT_EQ(run({"update", "--model", path("m.json"), "--t-prime", "0"}).code,
            cli::kExitIo);
  io::write_text(dir_ / "m.json", kTwoComponents);
  io::write_text(dir_ / "p.csv", "instance_id,t1,t2\na,0\n");
  EXPECT_EQ(run({"update", "--model", path("m.json"), "--data", path("p.csv"),
                 "--t-prime", "1"})
                .code,
            cli::kExitIo);
  io::write_text(dir_ / "p.csv", "instance_id,t1,t2\na,0,0\n");
  EXPECT_EQ(run({"update", "--model", path("m.json"), "--data", path("p.csv"),
                 "--t-prime", "-1"})
                .code,
            cli::kExitValidation);
}

} // namespace
} // namespace intraday
