#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "intraday/error.hpp"
#include "intraday/io.hpp"
#include "intraday/sampler.hpp"
#include "support.hpp"

namespace intraday {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using support::vec;

const std::filesystem::path kExamples = std::filesystem::path(FORMATS_DIR) / "examples";

std::string golden(const char *name) { return io::read_text(kExamples / name); }

ErrorKind kind_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kIo;
}

std::string message_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.what();
  }
  return {};
}

std::vector<MixtureForecast> mixed_model() {
  std::mt19937_64 rng(31);
  MatrixXd u = MatrixXd::Random(3, 4);
  const DictionaryPtr dict = make_dictionary("shared", u, 1e-3);
  std::vector<MixtureForecast> out;
  out.emplace_back(
      "a",
      std::vector<MvnComponent>{
          MvnComponent(vec({0.1, 1.0 / 3.0, -2.5}),
                       CovarianceSpec::pdcc(dict, vec({0.5, 1e-7, 2.0, 0.3}))),
          MvnComponent(vec({1, 2, 3}), CovarianceSpec::pdcc(dict, vec({1, 1, 1, 1})))},
      vec({0.1, 0.9}), std::vector<double>{0.25, -0.75});
  out.push_back(support::random_forecast(3, 3, rng, "b"));
  out.emplace_back("c",
                   std::vector<MvnComponent>{MvnComponent(
                       vec({0, 0, 0}), CovarianceSpec::diagonal(vec({0.1, 0.2, 0.3})))});
  return out;
}

void expect_same_model(const std::vector<MixtureForecast> &a,
                       const std::vector<MixtureForecast> &b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    EXPECT_EQ(a[n].id(), b[n].id());
    EXPECT_EQ(a[n].condition(), b[n].condition());
    EXPECT_EQ(a[n].weights(), b[n].weights());
    ASSERT_EQ(a[n].size(), b[n].size());
    for (std::size_t k = 0; k < a[n].size(); ++k) {
      EXPECT_EQ(a[n].component(k).mean(), b[n].component(k).mean());
      EXPECT_EQ(a[n].component(k).covariance(), b[n].component(k).covariance());
    }
  }
}

TEST(IoNumbers, ShortestRoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, i % 40 - 20);
    EXPECT_EQ(io::parse_double(io::format_double(x)), x);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(io::format_double(2.0), "2");
  EXPECT_EQ(kind_of([] { io::format_double(std::nan("")); }),
            ErrorKind::kNonFiniteInput);
  for (const char *bad : {"", "nan", "inf", "-inf", "1.5x", " 1"}) {
    EXPECT_EQ(kind_of([bad] { io::parse_double(bad); }), ErrorKind::kParseError)
        << bad;
  }
}

TEST(IoModel, RoundTripIsBitExact) {
  const auto model = mixed_model();
  const std::string text = io::format_model(model);
  const auto back = io::parse_model(text);
  expect_same_model(model, back);
  EXPECT_EQ(io::format_model(back), text);
  // the pdcc components still share one dictionary
  ASSERT_NE(back[0].component(0).spec().as_pdcc(), nullptr);
  EXPECT_EQ(back[0].component(0).spec().as_pdcc()->dictionary.get(),
            back[0].component(1).spec().as_pdcc()->dictionary.get());
}

TEST(IoModel, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "intraday_io_test";
  std::filesystem::create_directories(dir);
  const auto model = mixed_model();
  io::write_model(model, dir / "m.json");
  expect_same_model(model, io::read_model(dir / "m.json"));
  std::filesystem::remove_all(dir);
  EXPECT_EQ(kind_of([&] { io::read_model(dir / "missing.json"); }), ErrorKind::kIo);
}

TEST(IoModel, GoldenSingleComponent) {
  const auto model = io::parse_model(golden("model_k1_diag.json"));
  ASSERT_EQ(model.size(), 1u);
  const MixtureForecast &fc = model[0];
  EXPECT_EQ(fc.id(), "day-1");
  EXPECT_EQ(fc.horizon(), 3);
  EXPECT_EQ(fc.condition(), (std::vector<double>{0.0, 1.0}));
  EXPECT_TRUE(fc.has_uniform_weights());
  EXPECT_EQ(fc.component(0).covariance().diagonal(), vec({0.25, 0.25, 1.0}));
}

TEST(IoModel, GoldenPdccAndDense) {
  const auto model = io::parse_model(golden("model_k2_pdcc.json"));
  ASSERT_EQ(model.size(), 1u);
  EXPECT_EQ(model[0].weights(), vec({0.25, 0.75}));
  MatrixXd expected(2, 2);
  expected << 1.1, 0.0, 0.0, 4.1;
  EXPECT_LE((model[0].component(0).covariance() - expected).cwiseAbs().maxCoeff(),
            1e-15);
  EXPECT_EQ(model[0].component(1).covariance()(0, 1), 2.0);
}

std::string replace(std::string text, const std::string &from, const std::string &to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

TEST(IoModel, Rejections) {
  const std::string good = golden("model_k2_pdcc.json");
  EXPECT_EQ(kind_of([&] {
              io::parse_model(replace(good, "\"dictionary\":\"u\"", "\"dictionary\":\"w\""));
            }),
            ErrorKind::kDanglingDictionaryRef);
  EXPECT_EQ(kind_of([&] { io::parse_model(replace(good, "\"version\": 1", "\"version\": 2")); }),
            ErrorKind::kVersionMismatch);
  EXPECT_EQ(kind_of([&] { io::parse_model(replace(good, "\"k\":2", "\"k\":3")); }),
            ErrorKind::kShapeMismatch);
  EXPECT_EQ(kind_of([&] { io::parse_model(replace(good, "\"weights\":[0.25,0.75]",
                                                  "\"weights\":[0.5,0.75]")); }),
            ErrorKind::kInvalidArgument);

  const std::string unknown =
      message_of([&] { io::parse_model(replace(good, "\"aux_sigma\"", "\"extra\":1,\"aux_sigma\"")); });
  EXPECT_NE(unknown.find("/instances/0/components/0/cov"), std::string::npos) << unknown;
  EXPECT_NE(unknown.find("extra"), std::string::npos) << unknown;

  const std::string broken = message_of([&] { io::parse_model(replace(good, "\"horizon\": 2,", "\"horizon\": 2")); });
  EXPECT_NE(broken.find("ParseError"), std::string::npos) << broken;
  EXPECT_NE(broken.find("line 5"), std::string::npos) << broken;

  auto twice = io::parse_model(golden("model_k1_diag.json"));
  twice.push_back(twice.front());
  EXPECT_EQ(kind_of([&] { io::parse_model(io::format_model(twice)); }),
            ErrorKind::kDuplicateId);
}

TEST(IoProfiles, GoldenTables) {
  Dataset d = io::parse_profiles(golden("profiles.csv"), DatasetTag::kBestCase);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.tag, DatasetTag::kBestCase);
  EXPECT_EQ(d.instances[0].id, "day-1");
  EXPECT_EQ(d.instances[0].profile, vec({1.5, 2, 2.75}));
  EXPECT_EQ(d.instances[1].profile, vec({0.25, -1, 3}));
  io::attach_conditions(d, golden("conditions.csv"));
  EXPECT_EQ(d.instances[1].condition,
            (std::vector<double>{0.7818314824680298, 0.6234898018587336}));
  io::attach_labels(d, golden("labels.csv"));
  EXPECT_EQ(d.instances[1].generating_component, 3);

  EXPECT_EQ(io::format_profiles(d), golden("profiles.csv"));
  EXPECT_EQ(io::format_conditions(d), golden("conditions.csv"));
  EXPECT_EQ(io::format_labels(d), golden("labels.csv"));
}

TEST(IoProfiles, Rejections) {
  const std::string ragged = message_of(
      [] { io::parse_profiles("instance_id,t1,t2\na,1,2\nb,1\n"); });
  EXPECT_NE(ragged.find("RaggedRow"), std::string::npos) << ragged;
  EXPECT_NE(ragged.find("row 3"), std::string::npos) << ragged;
  EXPECT_EQ(kind_of([] { io::parse_profiles("instance_id,t1\na,1\na,2\n"); }),
            ErrorKind::kDuplicateId);
  EXPECT_EQ(kind_of([] { io::parse_profiles("instance_id,t1\na,nan\n"); }),
            ErrorKind::kParseError);
  EXPECT_EQ(kind_of([] { io::parse_profiles("instance_id,t1,t2\na,,1\n"); }),
            ErrorKind::kParseError);
  EXPECT_EQ(kind_of([] { io::parse_profiles("id,t1\na,1\n"); }), ErrorKind::kParseError);
  Dataset d = io::parse_profiles("instance_id,t1\na,1\n");
  EXPECT_EQ(kind_of([&] { io::attach_labels(d, "instance_id,generating_component\nz,0\n"); }),
            ErrorKind::kShapeMismatch);
}

TEST(IoEnsemble, GoldenAndRoundTrip) {
  const auto ens = io::parse_ensembles(golden("ensemble.csv"));
  ASSERT_EQ(ens.size(), 1u);
  EXPECT_EQ(ens[0].source_id, "day-1");
  EXPECT_EQ(ens[0].t_prime, 1);
  EXPECT_EQ(ens[0].size(), 2);
  EXPECT_EQ(ens[0].trajectories(1, 1), 2.5);
  EXPECT_EQ(io::format_ensembles(ens), golden("ensemble.csv"));

  std::mt19937_64 rng(5);
  const auto fc = support::random_forecast(5, 3, rng, "x");
  std::vector<Ensemble> many;
  for (const std::uint64_t seed : {1u, 2u}) {
    Ensemble e = sample_ensemble(update(fc, vec({0.2, -0.1})), 7, seed);
    e.source_id = "x" + std::to_string(seed);
    e.t_prime = 2;
    many.push_back(std::move(e));
  }
  const auto back = io::parse_ensembles(io::format_ensembles(many));
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].trajectories, many[i].trajectories);
    EXPECT_EQ(back[i].components, many[i].components);
    EXPECT_EQ(back[i].source_id, many[i].source_id);
  }
}

TEST(IoTraces, GoldenAndRoundTrip) {
  const auto traces = io::parse_traces(golden("traces.csv"));
  ASSERT_EQ(traces.size(), 2u);
  EXPECT_EQ(traces[0].variant, Variant::kUpdated);
  EXPECT_EQ(traces[1].variant, Variant::kNonUpdated);
  EXPECT_EQ(traces[1].dataset, DatasetTag::kBestCase);
  EXPECT_EQ(traces[1].values.at(1), 1.125);
  EXPECT_EQ(io::format_traces(traces), golden("traces.csv"));
  EXPECT_EQ(kind_of([] {
              io::parse_traces("dataset_tag,variant,metric,t_prime,value\n"
                               "real,updated,nll,0,1\nreal,updated,nll,0,2\n");
            }),
            ErrorKind::kDuplicateId);
}

TEST(IoGrid, GoldenAndRoundTrip) {
  const auto grids = io::parse_grids(golden("grid.csv"));
  ASSERT_EQ(grids.size(), 1u);
  EXPECT_EQ(grids[0].values.size(), 3u);
  EXPECT_EQ(grids[0].values.at({0, 2}), 0.625);
  EXPECT_EQ(io::format_grids(grids), golden("grid.csv"));
  EXPECT_EQ(kind_of([] { io::parse_grids("variant,t_prime,t,value\nupdated,2,2,1\n"); }),
            ErrorKind::kParseError);
}

TEST(IoGenerator, ConfigRoundTrip) {
  const GeneratorConfig golden_config = io::parse_generator_config(golden("generator.json"));
  EXPECT_EQ(golden_config.horizon, 24);
  EXPECT_EQ(golden_config.pool_size, 64u);

  GeneratorConfig c;
  c.horizon = 10;
  c.covariance = CovarianceStyle::kDiagonal;
  c.noise_scale = 0.3;
  c.seed = 77;
  const std::string text = io::format_generator_config(c);
  const GeneratorConfig back = io::parse_generator_config(text);
  EXPECT_EQ(io::format_generator_config(back), text);
  EXPECT_EQ(back.horizon, 10);
  EXPECT_EQ(back.covariance, CovarianceStyle::kDiagonal);
  EXPECT_EQ(back.noise_scale, 0.3);
  EXPECT_EQ(kind_of([] { io::parse_generator_config("{\"horizon\": 1}"); }),
            ErrorKind::kInvalidConfig);
  EXPECT_EQ(kind_of([] { io::parse_generator_config("{\"colour\": 1}"); }),
            ErrorKind::kParseError);
}

TEST(IoTuning, ReportRoundTrip) {
  TuningReport r;
  r.k_grid = {2, 5};
  r.gap = {{2, 0.25}, {5, 1.0 / 3.0}};
  r.k_star = 2;
  for (const std::size_t k : r.k_grid) {
    PerformanceTrace t{"nll", Variant::kUpdated, DatasetTag::kBestCase, {}};
    t.values = {{1, 0.5 * k}, {2, -0.1}};
    r.best_case[k] = t;
    t.dataset = DatasetTag::kSynthetic;
    t.values[1] += 0.25;
    r.synthetic[k] = t;
  }
  const std::string text = io::format_tuning_report(r);
  const TuningReport back = io::parse_tuning_report(text);
  EXPECT_EQ(back.k_grid, r.k_grid);
  EXPECT_EQ(back.gap, r.gap);
  EXPECT_EQ(back.k_star, 2u);
  EXPECT_EQ(back.synthetic.at(5).values, r.synthetic.at(5).values);
  EXPECT_EQ(io::format_tuning_report(back), text);
}

} // namespace
} // namespace intraday
