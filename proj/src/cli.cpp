#include "intraday/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "intraday/error.hpp"
#include "intraday/evaluation.hpp"
#include "intraday/io.hpp"
#include "intraday/random.hpp"
#include "intraday/sampler.hpp"
#include "intraday/synthgen.hpp"
#include "intraday/tuning.hpp"
#include "intraday/update.hpp"

namespace intraday::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr const char *kFormats = R"(File formats:
  model.json     {"format":"intraday-gmm","version":1,"horizon":T,
                  "dictionaries":[{"id","ridge","matrix":[[T x V]]}],
                  "instances":[{"id","condition":[..],"k":K,"weights":[..]?,
                    "components":[{"mean":[T],"cov":COV}]}]}
                 COV = {"kind":"diag","sigma":[T]}
                     | {"kind":"pdcc","dictionary":"<id>","aux_sigma":[V]}
                     | {"kind":"dense","matrix":[[T x T]]}
                 weights omitted means uniform 1/K
  profiles.csv   instance_id,t1,...,tT
  conditions.csv instance_id,c1,...,cD
  labels.csv     instance_id,generating_component
  ensemble.csv   instance_id,trace,component,t{T'+1},...,tT
  traces.csv     dataset_tag,variant,metric,t_prime,value
                 metrics: nll mae crps crps_raw rmse
  grid.csv       variant,t_prime,t,value  (AE per step, t > t_prime)
  generator.json GeneratorConfig fields, all optional

Exit codes: 0 ok, 1 validation error, 2 numerical failure, 3 IO failure.)";

struct GeneratorFlags {
  std::string config_path;
  Eigen::Index horizon = 0;
  std::uint64_t pool_size = 0;
  std::string covariance;
  std::uint64_t truth_seed = 0;
  CLI::Option *horizon_opt = nullptr;
  CLI::Option *pool_opt = nullptr;
  CLI::Option *truth_seed_opt = nullptr;

  void attach(CLI::App &cmd) {
    cmd.add_option("--config", config_path, "generator.json to start from");
    horizon_opt =
        cmd.add_option("--horizon", horizon, "steps per day T (default 24)");
    pool_opt = cmd.add_option("--pool-size", pool_size,
                              "finite latent pool M, 0 = infinite (default 64)");
    cmd.add_option("--covariance", covariance, "diag | pdcc (default pdcc)")
        ->check(CLI::IsMember({"diag", "pdcc"}));
    truth_seed_opt = cmd.add_option("--truth-seed", truth_seed,
                                    "seed freezing the ground truth (default 1)");
  }

  GeneratorConfig resolve() const {
    GeneratorConfig config;
    if (!config_path.empty()) {
      config = io::parse_generator_config(io::read_text(config_path));
    }
    if (horizon_opt->count() > 0) {
      config.horizon = horizon;
    }
    if (pool_opt->count() > 0) {
      config.pool_size = pool_size;
    }
    if (!covariance.empty()) {
      config.covariance = covariance == "pdcc" ? CovarianceStyle::kPdcc
                                               : CovarianceStyle::kDiagonal;
    }
    if (truth_seed_opt->count() > 0) {
      config.seed = truth_seed;
    }
    config.validate();
    return config;
  }
};

std::string instance_name(std::size_t n, std::size_t count) {
  std::string digits = std::to_string(n);
  const std::size_t width = std::max<std::size_t>(4, std::to_string(count).size());
  return "day-" + std::string(width - std::min(width, digits.size()), '0') +
         digits;
}

void emit(const std::string &path, const std::string &text, std::ostream &out) {
  if (path == "-") {
    out << text;
  } else {
    io::write_text(path, text);
  }
}

std::map<std::string, const Instance *> index_by_id(const Dataset &data) {
  std::map<std::string, const Instance *> out;
  for (const auto &inst : data.instances) {
    out.emplace(inst.id, &inst);
  }
  return out;
}

// Observations of forecast `fc` for update time t_prime.
Eigen::VectorXd observations(const MixtureForecast &fc, Eigen::Index t_prime,
                             const std::map<std::string, const Instance *> &data) {
  if (t_prime == 0) {
    return {};
  }
  const auto it = data.find(fc.id());
  if (it == data.end()) {
    throw Error(ErrorKind::kShapeMismatch,
                "no profile for instance '" + fc.id() + "' (pass --data)");
  }
  const Eigen::VectorXd &profile = it->second->profile;
  if (profile.size() != fc.horizon()) {
    throw Error(ErrorKind::kShapeMismatch,
                "profile '" + fc.id() + "' has a different horizon");
  }
  if (t_prime < 0 || t_prime > fc.horizon()) {
    throw Error(ErrorKind::kOutOfBounds,
                "T'=" + std::to_string(t_prime) + " outside [0, " +
                    std::to_string(fc.horizon()) + "]");
  }
  return profile.head(t_prime);
}

std::vector<MixtureForecast> select(std::vector<MixtureForecast> forecasts,
                                    const std::string &only) {
  if (only.empty()) {
    return forecasts;
  }
  for (auto &fc : forecasts) {
    if (fc.id() == only) {
      return {std::move(fc)};
    }
  }
  throw Error(ErrorKind::kInvalidArgument, "no instance '" + only + "'");
}

Json vector_json(const Eigen::Ref<const Eigen::VectorXd> &v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

std::vector<Eigen::Index> parse_t_primes(const std::string &text) {
  std::vector<Eigen::Index> out;
  if (text.empty()) {
    return out;
  }
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto colon = part.find(':');
    try {
      if (colon == std::string::npos) {
        out.push_back(std::stoll(part));
      } else {
        const long long lo = std::stoll(part.substr(0, colon));
        const long long hi = std::stoll(part.substr(colon + 1));
        if (hi < lo) {
          throw Error(ErrorKind::kInvalidArgument,
                      "--t-primes: empty range '" + part + "'");
        }
        for (long long t = lo; t <= hi; ++t) {
          out.push_back(t);
        }
      }
    } catch (const std::logic_error &) {
      throw Error(ErrorKind::kInvalidArgument,
                  "--t-primes: bad entry '" + part + "'");
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---- gen ----

struct GenOptions {
  GeneratorFlags generator;
  std::string out_dir;
  std::size_t count = 16;
  std::size_t components = 4;
  std::string kind = "real";
  std::uint64_t seed = 0;
};

void cmd_gen(const GenOptions &opt, std::ostream &err) {
  const GeneratorConfig config = opt.generator.resolve();
  const GroundTruth truth(config);
  const DatasetTag tag = parse_dataset_tag(opt.kind);
  const auto conditions =
      make_conditions(opt.count, derive_key(opt.seed, {hash_string("conditions")}));

  std::vector<MixtureForecast> forecasts;
  forecasts.reserve(opt.count);
  for (std::size_t n = 0; n < opt.count; ++n) {
    forecasts.push_back(approximate_forecast(
        truth, instance_name(n, opt.count), conditions[n], opt.components,
        derive_key(opt.seed, {hash_string("forecast"), n})));
  }

  Dataset data;
  if (tag == DatasetTag::kBestCase) {
    data = build_best_case_set(forecasts,
                               derive_key(opt.seed, {hash_string("best_case")}));
  } else {
    data.tag = tag;
    const std::uint64_t stream = hash_string(to_string(tag));
    for (std::size_t n = 0; n < opt.count; ++n) {
      Instance inst;
      inst.id = forecasts[n].id();
      inst.condition = conditions[n];
      inst.profile =
          draw_day(truth, conditions[n], derive_key(opt.seed, {stream, n}))
              .profile;
      data.instances.push_back(std::move(inst));
    }
  }

  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);
  io::write_model(forecasts, dir / "model.json");
  io::write_profiles(data, dir / "profiles.csv");
  io::write_text(dir / "conditions.csv", io::format_conditions(data));
  if (tag == DatasetTag::kBestCase) {
    io::write_text(dir / "labels.csv", io::format_labels(data));
  }
  io::write_text(dir / "generator.json", io::format_generator_config(config));
  err << "gen: " << opt.count << " " << to_string(tag) << " instances, T="
      << config.horizon << ", K=" << opt.components << " -> " << opt.out_dir
      << "\n";
}

// ---- update ----

struct UpdateOptions {
  std::string model;
  std::string data;
  Eigen::Index t_prime = 0;
  std::string instance;
  std::string out = "-";
};

void cmd_update(const UpdateOptions &opt, std::ostream &out) {
  const auto forecasts = select(io::read_model(opt.model), opt.instance);
  Dataset data;
  if (!opt.data.empty()) {
    data = io::read_profiles(opt.data);
  }
  const auto by_id = index_by_id(data);
  std::string text;
  for (const auto &fc : forecasts) {
    if (opt.t_prime >= fc.horizon()) {
      throw Error(ErrorKind::kOutOfBounds,
                  "T'=" + std::to_string(opt.t_prime) + " leaves nothing to "
                  "forecast for '" + fc.id() + "' (T=" +
                      std::to_string(fc.horizon()) + ")");
    }
    const IntradayUpdate upd =
        update(std::make_shared<const MixtureForecast>(fc),
               observations(fc, opt.t_prime, by_id));
    Json line;
    line["id"] = fc.id();
    line["t_prime"] = upd.t_prime();
    line["gamma"] = vector_json(upd.gamma());
    Json comps = Json::array();
    for (std::size_t k = 0; k < fc.size(); ++k) {
      if (upd.gamma()[static_cast<Eigen::Index>(k)] == 0.0) {
        comps.push_back(nullptr);
        continue;
      }
      const auto cond = upd.conditioned(k);
      Json rows = Json::array();
      for (Eigen::Index r = 0; r < cond->covariance.rows(); ++r) {
        rows.push_back(vector_json(cond->covariance.row(r).transpose()));
      }
      Json comp;
      comp["mean"] = vector_json(cond->mean);
      comp["covariance"] = std::move(rows);
      comps.push_back(std::move(comp));
    }
    line["components"] = std::move(comps);
    text += line.dump() + "\n";
  }
  emit(opt.out, text, out);
}

// ---- sample ----

struct SampleOptions {
  std::string model;
  std::string data;
  Eigen::Index t_prime = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string variant = "updated";
  std::string instance;
  std::string out = "-";
};

void cmd_sample(const SampleOptions &opt, std::ostream &out) {
  const auto forecasts = select(io::read_model(opt.model), opt.instance);
  Dataset data;
  if (!opt.data.empty()) {
    data = io::read_profiles(opt.data);
  }
  const auto by_id = index_by_id(data);
  const Variant variant = parse_variant(opt.variant);
  std::vector<Ensemble> ensembles;
  for (const auto &fc : forecasts) {
    if (opt.t_prime >= fc.horizon()) {
      throw Error(ErrorKind::kOutOfBounds,
                  "T'=" + std::to_string(opt.t_prime) + " leaves nothing to "
                  "forecast for '" + fc.id() + "'");
    }
    const std::size_t samples = opt.samples > 0 ? opt.samples : fc.size();
    const IntradayUpdate upd =
        variant == Variant::kUpdated
            ? update(std::make_shared<const MixtureForecast>(fc),
                     observations(fc, opt.t_prime, by_id))
            : non_updated(fc, opt.t_prime);
    Ensemble ens = sample_ensemble(upd, samples, opt.seed);
    ens.t_prime = opt.t_prime;
    ens.source_id = fc.id();
    ensembles.push_back(std::move(ens));
  }
  emit(opt.out, io::format_ensembles(ensembles), out);
}

// ---- evaluate ----

struct EvaluateOptions {
  std::string model;
  std::string data;
  std::string tag = "real";
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string t_primes;
  std::vector<double> levels = default_quantile_levels();
  Eigen::Index excluded_tail = 0;
  int threads = 1;
  bool no_cache = false;
  std::string traces = "-";
  std::string grid;
};

void cmd_evaluate(const EvaluateOptions &opt, std::ostream &out,
                  std::ostream &err) {
  const auto forecasts = io::read_model(opt.model);
  const Dataset data = io::read_profiles(opt.data, parse_dataset_tag(opt.tag));
  // forecasts are matched to profiles by id
  const auto by_id = index_by_id(data);
  Dataset ordered;
  ordered.tag = data.tag;
  for (const auto &fc : forecasts) {
    const auto it = by_id.find(fc.id());
    if (it == by_id.end()) {
      throw Error(ErrorKind::kShapeMismatch,
                  "no profile for instance '" + fc.id() + "'");
    }
    ordered.instances.push_back(*it->second);
  }

  EvaluationOptions options;
  options.t_primes = parse_t_primes(opt.t_primes);
  options.samples = opt.samples;
  options.seed = opt.seed;
  options.levels = opt.levels;
  options.excluded_tail = opt.excluded_tail;
  options.cache = opt.no_cache ? CachePolicy::kDisabled : CachePolicy::kEnabled;
  options.threads = opt.threads;
  const EvaluationResult result = evaluate(ordered, forecasts, options);

  emit(opt.traces, io::format_traces(result.traces()), out);
  if (!opt.grid.empty()) {
    const std::vector<WaterfallGrid> grids{result.updated.grid,
                                           result.non_updated.grid};
    emit(opt.grid, io::format_grids(grids), out);
  }
  err << "evaluate: " << ordered.size() - result.failed_instances.size()
      << " of " << ordered.size() << " instances scored, "
      << result.t_primes.size() << " update times\n";
  for (const auto &id : result.failed_instances) {
    err << "  excluded after numerical failure: " << id << "\n";
  }
}

// ---- tune-k ----

struct TuneOptions {
  GeneratorFlags generator;
  std::vector<std::size_t> k_grid{2, 5, 10, 25, 50, 100};
  std::size_t count = 512;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out = "-";
};

void cmd_tune(const TuneOptions &opt, std::ostream &out, std::ostream &err) {
  const GeneratorConfig config = opt.generator.resolve();
  const GroundTruth truth(config);
  const auto conditions =
      make_conditions(opt.count, derive_key(opt.seed, {hash_string("conditions")}));
  TuningSeeds seeds;
  seeds.forecast = derive_key(opt.seed, {hash_string("tune-forecast")});
  seeds.best_case = derive_key(opt.seed, {hash_string("tune-best-case")});
  seeds.synthetic = derive_key(opt.seed, {hash_string("tune-synthetic")});
  const TuningReport report =
      select_k(opt.k_grid, truth, conditions, seeds, opt.threads);
  emit(opt.out, io::format_tuning_report(report), out);
  for (const std::size_t k : report.k_grid) {
    err << "tune-k: K=" << k << " gap=" << report.gap.at(k) << "\n";
  }
  err << "tune-k: selected K=" << report.k_star << "\n";
}

int exit_code(const Error &e) {
  switch (e.error_category()) {
  case ErrorCategory::kValidation:
    return kExitValidation;
  case ErrorCategory::kNumerical:
    return kExitNumerical;
  case ErrorCategory::kIo:
    return kExitIo;
  }
  return kExitValidation;
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out,
        std::ostream &err) {
  CLI::App app{"Intraday updating of Gaussian-mixture day-ahead forecasts"};
  app.footer(kFormats);
  app.require_subcommand(1);

  GenOptions gen;
  auto *gen_cmd = app.add_subcommand(
      "gen", "Generate a synthetic ground truth, K-component forecasts and a "
             "test set");
  gen.generator.attach(*gen_cmd);
  gen_cmd->add_option("--out-dir", gen.out_dir, "output directory")->required();
  gen_cmd->add_option("-n,--instances", gen.count, "number of days")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("-k,--components", gen.components, "mixture size K")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--kind", gen.kind, "real | synthetic | best-case")
      ->capture_default_str()
      ->check(CLI::IsMember({"real", "synthetic", "best-case", "best_case"}));
  gen_cmd->add_option("--seed", gen.seed, "run seed")->required();

  UpdateOptions upd;
  auto *upd_cmd = app.add_subcommand(
      "update", "Condition each forecast on its first T' observations; prints "
                "one JSON line per instance with gamma and conditioned moments");
  upd_cmd->add_option("--model", upd.model, "model.json")
      ->required();
  upd_cmd->add_option("--data", upd.data, "profiles.csv (needed when T' > 0)");
  upd_cmd->add_option("--t-prime", upd.t_prime, "observed steps T'")
      ->required()
      ->check(CLI::NonNegativeNumber);
  upd_cmd->add_option("--instance", upd.instance, "only this instance id");
  upd_cmd->add_option("-o,--out", upd.out, "output path, - for stdout")
      ->capture_default_str();

  SampleOptions smp;
  auto *smp_cmd = app.add_subcommand(
      "sample", "Draw an ensemble from the updated (or non-updated) forecast");
  smp_cmd->add_option("--model", smp.model, "model.json")
      ->required();
  smp_cmd->add_option("--data", smp.data, "profiles.csv (needed when T' > 0)");
  smp_cmd->add_option("--t-prime", smp.t_prime, "observed steps T'")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  smp_cmd->add_option("-s,--samples", smp.samples, "ensemble size S, 0 = K")
      ->capture_default_str();
  smp_cmd->add_option("--seed", smp.seed, "sampling seed")->required();
  smp_cmd->add_option("--variant", smp.variant, "updated | non_updated")
      ->capture_default_str()
      ->check(CLI::IsMember({"updated", "non_updated"}));
  smp_cmd->add_option("--instance", smp.instance, "only this instance id");
  smp_cmd->add_option("-o,--out", smp.out, "output path, - for stdout")
      ->capture_default_str();

  EvaluateOptions ev;
  auto *ev_cmd = app.add_subcommand(
      "evaluate", "Score updated and non-updated forecasts at every T' "
                  "(NLL, MAE, CRPS, RMSE traces and the AE grid)");
  ev_cmd->add_option("--model", ev.model, "model.json")
      ->required();
  ev_cmd->add_option("--data", ev.data, "profiles.csv")
      ->required();
  ev_cmd->add_option("--tag", ev.tag, "dataset tag written to the traces")
      ->capture_default_str()
      ->check(CLI::IsMember({"real", "synthetic", "best-case", "best_case"}));
  ev_cmd->add_option("-s,--samples", ev.samples, "ensemble size S, 0 = max(K, 2)")
      ->capture_default_str();
  ev_cmd->add_option("--seed", ev.seed, "sampling seed")->required();
  ev_cmd->add_option("--t-primes", ev.t_primes,
                     "update times, e.g. 0:23 or 1,6,12 (default all)");
  ev_cmd->add_option("--levels", ev.levels, "quantile levels")
      ->delimiter(',')
      ->default_str("0.05,0.10,...,0.95");
  ev_cmd->add_option("--excluded-tail", ev.excluded_tail,
                     "trailing steps left out of averages (28 for PV at T=96)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  ev_cmd->add_option("--threads", ev.threads, "instance-level threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  ev_cmd->add_flag("--no-cache", ev.no_cache,
                   "recompute conditioned moments on every use");
  ev_cmd->add_option("--traces", ev.traces, "trace table path, - for stdout")
      ->capture_default_str();
  ev_cmd->add_option("--grid", ev.grid, "waterfall grid path");

  TuneOptions tune;
  auto *tune_cmd = app.add_subcommand(
      "tune-k", "Select K by the gap between best-case and synthetic NLL traces");
  tune.generator.attach(*tune_cmd);
  tune_cmd->add_option("--k-grid", tune.k_grid, "candidate K values")
      ->delimiter(',')
      ->default_str("2,5,10,25,50,100")
      ->check(CLI::PositiveNumber);
  tune_cmd->add_option("-n,--instances", tune.count, "days per test set")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  tune_cmd->add_option("--seed", tune.seed, "run seed")->required();
  tune_cmd->add_option("--threads", tune.threads, "instance-level threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  tune_cmd->add_option("-o,--out", tune.out, "report path, - for stdout")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen_cmd) {
      cmd_gen(gen, err);
    } else if (*upd_cmd) {
      cmd_update(upd, out);
    } else if (*smp_cmd) {
      cmd_sample(smp, out);
    } else if (*ev_cmd) {
      cmd_evaluate(ev, out, err);
    } else if (*tune_cmd) {
      cmd_tune(tune, out, err);
    }
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const fs::filesystem_error &e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

} // namespace intraday::cli
