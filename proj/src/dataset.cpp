#include "intraday/dataset.hpp"

#include <string>

#include "intraday/error.hpp"

namespace intraday {

std::string_view to_string(DatasetTag tag) {
  switch (tag) {
  case DatasetTag::kReal:
    return "real";
  case DatasetTag::kSynthetic:
    return "synthetic";
  case DatasetTag::kBestCase:
    return "best_case";
  }
  return "real";
}

std::string_view to_string(Variant variant) {
  return variant == Variant::kUpdated ? "updated" : "non_updated";
}

DatasetTag parse_dataset_tag(std::string_view text) {
  if (text == "real") {
    return DatasetTag::kReal;
  }
  if (text == "synthetic") {
    return DatasetTag::kSynthetic;
  }
  if (text == "best_case" || text == "best-case") {
    return DatasetTag::kBestCase;
  }
  throw Error(ErrorKind::kInvalidArgument,
              "unknown dataset tag '" + std::string(text) + "'");
}

Variant parse_variant(std::string_view text) {
  if (text == "updated") {
    return Variant::kUpdated;
  }
  if (text == "non_updated") {
    return Variant::kNonUpdated;
  }
  throw Error(ErrorKind::kInvalidArgument,
              "unknown variant '" + std::string(text) + "'");
}

} // namespace intraday
