#ifndef INTRADAY_DATASET_HPP_
#define INTRADAY_DATASET_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace intraday {

enum class DatasetTag { kReal, kSynthetic, kBestCase };
enum class Variant { kUpdated, kNonUpdated };

std::string_view to_string(DatasetTag tag);
std::string_view to_string(Variant variant);
/// Accepts "real", "synthetic", "best_case" and "best-case".
DatasetTag parse_dataset_tag(std::string_view text);
Variant parse_variant(std::string_view text);

/// One observed (or generated) day.
struct Instance {
  std::string id;
  Eigen::VectorXd profile;
  std::vector<double> condition;
  /// Index of the mixture component that generated a best-case draw.
  std::optional<int> generating_component;
};

struct Dataset {
  DatasetTag tag = DatasetTag::kReal;
  std::vector<Instance> instances;

  std::size_t size() const { return instances.size(); }
  /// Horizon of the first instance, 0 when empty.
  Eigen::Index horizon() const {
    return instances.empty() ? 0 : instances.front().profile.size();
  }
};

} // namespace intraday

#endif // INTRADAY_DATASET_HPP_
