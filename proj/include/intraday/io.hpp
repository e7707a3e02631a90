#ifndef INTRADAY_IO_HPP_
#define INTRADAY_IO_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intraday/dataset.hpp"
#include "intraday/metrics.hpp"
#include "intraday/mixture.hpp"
#include "intraday/sampler.hpp"
#include "intraday/synthgen.hpp"
#include "intraday/tuning.hpp"

namespace intraday::io {

inline constexpr std::string_view kModelFormat = "intraday-gmm";
inline constexpr int kModelVersion = 1;

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);
/// Whole-field parse; rejects NaN, infinities, blanks and trailing text.
double parse_double(std::string_view text);

std::string read_text(const std::filesystem::path &path);
void write_text(const std::filesystem::path &path, std::string_view text);

// Model files: JSON, one dictionary or instance per line.

std::string format_model(std::span<const MixtureForecast> forecasts);
std::vector<MixtureForecast> parse_model(std::string_view text);
std::vector<MixtureForecast> read_model(const std::filesystem::path &path);
void write_model(std::span<const MixtureForecast> forecasts,
                 const std::filesystem::path &path);

// Profile tables: instance_id,t1..tT. Companion tables keyed by instance_id:
// conditions (instance_id,c1..cD) and labels (instance_id,generating_component).

std::string format_profiles(const Dataset &dataset);
std::string format_conditions(const Dataset &dataset);
/// Instances without a recorded component are skipped.
std::string format_labels(const Dataset &dataset);
Dataset parse_profiles(std::string_view text,
                       DatasetTag tag = DatasetTag::kReal);
/// Every instance must appear exactly once in the table.
void attach_conditions(Dataset &dataset, std::string_view text);
/// Ids must exist in the dataset; missing instances stay unlabelled.
void attach_labels(Dataset &dataset, std::string_view text);
Dataset read_profiles(const std::filesystem::path &path,
                      DatasetTag tag = DatasetTag::kReal);
void write_profiles(const Dataset &dataset, const std::filesystem::path &path);

// Ensembles: instance_id,trace,component,t{T'+1}..tT. All ensembles in one
// file share T'.

std::string format_ensembles(std::span<const Ensemble> ensembles);
std::vector<Ensemble> parse_ensembles(std::string_view text);
void write_ensemble(std::span<const Ensemble> ensembles,
                    const std::filesystem::path &path);

// Trace table: dataset_tag,variant,metric,t_prime,value.
// Grid table: variant,t_prime,t,value.

std::string format_traces(std::span<const PerformanceTrace> traces);
/// Traces in order of first appearance.
std::vector<PerformanceTrace> parse_traces(std::string_view text);
void write_trace(std::span<const PerformanceTrace> traces,
                 const std::filesystem::path &path);

std::string format_grids(std::span<const WaterfallGrid> grids);
std::vector<WaterfallGrid> parse_grids(std::string_view text);
void write_grid(std::span<const WaterfallGrid> grids,
                const std::filesystem::path &path);

/// Generator config JSON; every field optional, unknown fields rejected.
std::string format_generator_config(const GeneratorConfig &config);
GeneratorConfig parse_generator_config(std::string_view text,
                                       GeneratorConfig base = {});

std::string format_tuning_report(const TuningReport &report);
TuningReport parse_tuning_report(std::string_view text);

} // namespace intraday::io

#endif // INTRADAY_IO_HPP_
