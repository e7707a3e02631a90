#include "intraday/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <system_error>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "intraday/error.hpp"

namespace intraday::io {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void parse_fail(const std::string &what) {
  throw Error(ErrorKind::kParseError, what);
}

void check_id(const std::string &id) {
  if (id.empty() || id.find_first_of(",\"\r\n") != std::string::npos) {
    throw Error(ErrorKind::kInvalidArgument,
                "instance id '" + id + "' must be non-empty without commas, "
                                       "quotes or line breaks");
  }
}

// ---- CSV ----

struct Row {
  std::size_t line = 0;
  std::vector<std::string_view> cells;
};

std::vector<Row> split_csv(std::string_view text) {
  std::vector<Row> rows;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (!raw.empty() && raw.back() == '\r') {
      raw.remove_suffix(1);
    }
    if (raw.empty()) {
      if (pos < text.size()) {
        parse_fail("line " + std::to_string(line) + ": empty line");
      }
      continue;
    }
    Row row;
    row.line = line;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = raw.find(',', start);
      if (comma == std::string_view::npos) {
        row.cells.push_back(raw.substr(start));
        break;
      }
      row.cells.push_back(raw.substr(start, comma - start));
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double cell_double(const Row &row, std::size_t col) {
  try {
    return parse_double(row.cells[col]);
  } catch (const Error &e) {
    parse_fail("line " + std::to_string(row.line) + ", column " +
               std::to_string(col + 1) + ": " + e.detail());
  }
}

long long cell_integer(const Row &row, std::size_t col) {
  const std::string_view text = row.cells[col];
  long long value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    parse_fail("line " + std::to_string(row.line) + ", column " +
               std::to_string(col + 1) + ": expected an integer, got '" +
               std::string(text) + "'");
  }
  return value;
}

void expect_width(const Row &row, std::size_t width) {
  if (row.cells.size() != width) {
    throw Error(ErrorKind::kRaggedRow,
                "row " + std::to_string(row.line) + " has " +
                    std::to_string(row.cells.size()) + " fields, expected " +
                    std::to_string(width));
  }
}

void expect_header(const Row &row, std::span<const std::string> names) {
  bool ok = row.cells.size() == names.size();
  for (std::size_t i = 0; ok && i < names.size(); ++i) {
    ok = row.cells[i] == names[i];
  }
  if (!ok) {
    std::string wanted;
    for (const auto &n : names) {
      wanted += (wanted.empty() ? "" : ",") + n;
    }
    parse_fail("line " + std::to_string(row.line) + ": expected header '" +
               wanted + "'");
  }
}

std::vector<std::string> numbered(std::string_view prefix, Eigen::Index first,
                                  Eigen::Index last) {
  std::vector<std::string> out;
  for (Eigen::Index i = first; i <= last; ++i) {
    out.push_back(std::string(prefix) + std::to_string(i));
  }
  return out;
}

// Header "first,prefix1..prefixN" with N >= 1 inferred from the header.
Eigen::Index numbered_width(const Row &header,
                            std::initializer_list<std::string> lead,
                            std::string_view prefix, Eigen::Index first) {
  if (header.cells.size() <= lead.size()) {
    parse_fail("line 1: header has no value columns");
  }
  const auto count =
      static_cast<Eigen::Index>(header.cells.size() - lead.size());
  std::vector<std::string> names(lead);
  for (const auto &n : numbered(prefix, first, first + count - 1)) {
    names.push_back(n);
  }
  expect_header(header, names);
  return count;
}

void append_row(std::string &out, std::span<const std::string> cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) {
      out += ',';
    }
    out += cells[i];
  }
  out += '\n';
}

// ---- JSON helpers ----

std::string pointer(const std::string &base, std::string_view key) {
  return base + "/" + std::string(key);
}

std::string pointer(const std::string &base, std::size_t index) {
  return base + "/" + std::to_string(index);
}

void expect_keys(const Json &obj, const std::string &path,
                 std::initializer_list<std::string_view> required,
                 std::initializer_list<std::string_view> optional = {}) {
  if (!obj.is_object()) {
    parse_fail((path.empty() ? "/" : path) + ": expected an object");
  }
  for (const auto &key : required) {
    if (!obj.contains(std::string(key))) {
      parse_fail(pointer(path, key) + ": missing field");
    }
  }
  for (const auto &item : obj.items()) {
    bool known = false;
    for (const auto &key : required) {
      known = known || item.key() == key;
    }
    for (const auto &key : optional) {
      known = known || item.key() == key;
    }
    if (!known) {
      parse_fail(pointer(path, item.key()) + ": unknown field");
    }
  }
}

double json_double(const Json &value, const std::string &path) {
  if (!value.is_number()) {
    parse_fail(path + ": expected a number");
  }
  return value.get<double>();
}

std::string json_string(const Json &value, const std::string &path) {
  if (!value.is_string()) {
    parse_fail(path + ": expected a string");
  }
  return value.get<std::string>();
}

long long json_integer(const Json &value, const std::string &path) {
  if (!value.is_number_integer()) {
    parse_fail(path + ": expected an integer");
  }
  return value.get<long long>();
}

Eigen::VectorXd json_vector(const Json &value, const std::string &path) {
  if (!value.is_array()) {
    parse_fail(path + ": expected an array");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = json_double(value[i], pointer(path, i));
  }
  return out;
}

Eigen::MatrixXd json_matrix(const Json &value, const std::string &path) {
  if (!value.is_array() || value.empty()) {
    parse_fail(path + ": expected a non-empty array of rows");
  }
  const std::size_t cols = value[0].is_array() ? value[0].size() : 0;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(value.size()),
                      static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < value.size(); ++r) {
    const Eigen::VectorXd row = json_vector(value[r], pointer(path, r));
    if (static_cast<std::size_t>(row.size()) != cols) {
      parse_fail(pointer(path, r) + ": ragged matrix row");
    }
    out.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return out;
}

Json vector_json(const Eigen::Ref<const Eigen::VectorXd> &v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(v[i]);
  }
  return out;
}

Json matrix_json(const Eigen::MatrixXd &m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out.push_back(vector_json(m.row(r).transpose()));
  }
  return out;
}

// Rethrows validation errors raised while building objects with the JSON
// location attached.
template <typename Fn> auto at_path(const std::string &path, Fn &&fn) {
  try {
    return fn();
  } catch (const Error &e) {
    if (e.error_category() == ErrorCategory::kIo) {
      throw;
    }
    throw Error(e.kind(), path + ": " + e.detail());
  }
}

Json covariance_json(const CovarianceSpec &cov) {
  Json out;
  if (const auto *d = cov.as_diagonal()) {
    out["kind"] = "diag";
    out["sigma"] = vector_json(d->sigma);
  } else if (const auto *p = cov.as_pdcc()) {
    out["kind"] = "pdcc";
    out["dictionary"] = p->dictionary->id;
    out["aux_sigma"] = vector_json(p->aux_sigma);
  } else {
    out["kind"] = "dense";
    out["matrix"] = matrix_json(cov.as_dense()->matrix);
  }
  return out;
}

CovarianceSpec parse_covariance(
    const Json &obj, const std::string &path,
    const std::unordered_map<std::string, DictionaryPtr> &dictionaries) {
  if (!obj.is_object() || !obj.contains("kind")) {
    parse_fail(pointer(path, "kind") + ": missing field");
  }
  const std::string kind = json_string(obj["kind"], pointer(path, "kind"));
  if (kind == "diag") {
    expect_keys(obj, path, {"kind", "sigma"});
    Eigen::VectorXd sigma = json_vector(obj["sigma"], pointer(path, "sigma"));
    return at_path(path, [&] { return CovarianceSpec::diagonal(sigma); });
  }
  if (kind == "pdcc") {
    expect_keys(obj, path, {"kind", "dictionary", "aux_sigma"});
    const std::string id =
        json_string(obj["dictionary"], pointer(path, "dictionary"));
    const auto it = dictionaries.find(id);
    if (it == dictionaries.end()) {
      throw Error(ErrorKind::kDanglingDictionaryRef,
                  pointer(path, "dictionary") + ": no dictionary '" + id + "'");
    }
    Eigen::VectorXd aux =
        json_vector(obj["aux_sigma"], pointer(path, "aux_sigma"));
    return at_path(path,
                   [&] { return CovarianceSpec::pdcc(it->second, aux); });
  }
  if (kind == "dense") {
    expect_keys(obj, path, {"kind", "matrix"});
    Eigen::MatrixXd matrix = json_matrix(obj["matrix"], pointer(path, "matrix"));
    return at_path(path, [&] { return CovarianceSpec::dense(matrix); });
  }
  parse_fail(pointer(path, "kind") + ": unknown covariance kind '" + kind +
             "'");
}

} // namespace

std::string format_double(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::kNonFiniteInput, "cannot write a non-finite value");
  }
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    parse_fail("expected a finite number, got '" + std::string(text) + "'");
  }
  return value;
}

std::string read_text(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::filesystem::path &path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
  }
}

// ---- model ----

std::string format_model(std::span<const MixtureForecast> forecasts) {
  const Eigen::Index horizon =
      forecasts.empty() ? 0 : forecasts.front().horizon();
  std::vector<DictionaryPtr> dictionaries;
  std::set<std::string> ids;
  for (const auto &fc : forecasts) {
    check_id(fc.id());
    if (fc.horizon() != horizon) {
      throw Error(ErrorKind::kShapeMismatch,
                  "model file: forecast '" + fc.id() + "' has horizon " +
                      std::to_string(fc.horizon()) + ", expected " +
                      std::to_string(horizon));
    }
    if (!ids.insert(fc.id()).second) {
      throw Error(ErrorKind::kDuplicateId, "model file: duplicate id '" +
                                               fc.id() + "'");
    }
    const DictionaryPtr &dict = fc.dictionary();
    if (!dict) {
      continue;
    }
    bool seen = false;
    for (const auto &d : dictionaries) {
      if (d == dict) {
        seen = true;
      } else if (d->id == dict->id) {
        throw Error(ErrorKind::kInvalidArgument,
                    "model file: two different dictionaries named '" +
                        dict->id + "'");
      }
    }
    if (!seen) {
      dictionaries.push_back(dict);
    }
  }

  std::string out = "{\n";
  out += "\"format\": " + Json(kModelFormat).dump() + ",\n";
  out += "\"version\": " + std::to_string(kModelVersion) + ",\n";
  out += "\"horizon\": " + std::to_string(horizon) + ",\n";
  out += "\"dictionaries\": [";
  for (std::size_t i = 0; i < dictionaries.size(); ++i) {
    Json d;
    d["id"] = dictionaries[i]->id;
    d["ridge"] = dictionaries[i]->ridge;
    d["matrix"] = matrix_json(dictionaries[i]->patterns);
    out += (i == 0 ? "\n" : ",\n") + d.dump();
  }
  out += dictionaries.empty() ? "],\n" : "\n],\n";
  out += "\"instances\": [";
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    const auto &fc = forecasts[i];
    Json inst;
    inst["id"] = fc.id();
    inst["condition"] = Json(fc.condition());
    inst["k"] = fc.size();
    if (!fc.has_uniform_weights()) {
      inst["weights"] = vector_json(fc.weights());
    }
    Json comps = Json::array();
    for (const auto &c : fc.components()) {
      Json comp;
      comp["mean"] = vector_json(c.mean());
      comp["cov"] = covariance_json(c.spec());
      comps.push_back(std::move(comp));
    }
    inst["components"] = std::move(comps);
    out += (i == 0 ? "\n" : ",\n") + inst.dump();
  }
  out += forecasts.empty() ? "]\n}\n" : "\n]\n}\n";
  return out;
}

std::vector<MixtureForecast> parse_model(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error &e) {
    parse_fail(e.what());
  }
  expect_keys(doc, "", {"format", "version", "horizon", "instances"},
              {"dictionaries"});
  if (json_string(doc["format"], "/format") != kModelFormat) {
    parse_fail("/format: expected '" + std::string(kModelFormat) + "'");
  }
  const long long version = json_integer(doc["version"], "/version");
  if (version != kModelVersion) {
    throw Error(ErrorKind::kVersionMismatch,
                "/version: file has " + std::to_string(version) +
                    ", reader supports " + std::to_string(kModelVersion));
  }
  const long long horizon = json_integer(doc["horizon"], "/horizon");
  if (horizon < 0) {
    parse_fail("/horizon: must be >= 0");
  }

  std::unordered_map<std::string, DictionaryPtr> dictionaries;
  if (doc.contains("dictionaries")) {
    const Json &list = doc["dictionaries"];
    if (!list.is_array()) {
      parse_fail("/dictionaries: expected an array");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = pointer("/dictionaries", i);
      expect_keys(list[i], path, {"id", "matrix", "ridge"});
      std::string id = json_string(list[i]["id"], pointer(path, "id"));
      const double ridge = json_double(list[i]["ridge"], pointer(path, "ridge"));
      Eigen::MatrixXd matrix =
          json_matrix(list[i]["matrix"], pointer(path, "matrix"));
      if (matrix.rows() != horizon) {
        throw Error(ErrorKind::kShapeMismatch,
                    pointer(path, "matrix") + ": expected " +
                        std::to_string(horizon) + " rows");
      }
      if (dictionaries.count(id) != 0) {
        throw Error(ErrorKind::kDuplicateId,
                    pointer(path, "id") + ": duplicate dictionary '" + id + "'");
      }
      DictionaryPtr dict =
          at_path(path, [&] { return make_dictionary(id, matrix, ridge); });
      dictionaries.emplace(std::move(id), std::move(dict));
    }
  }

  const Json &instances = doc["instances"];
  if (!instances.is_array()) {
    parse_fail("/instances: expected an array");
  }
  std::vector<MixtureForecast> out;
  std::unordered_set<std::string> ids;
  out.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const std::string path = pointer("/instances", i);
    const Json &inst = instances[i];
    expect_keys(inst, path, {"id", "condition", "k", "components"}, {"weights"});
    std::string id = json_string(inst["id"], pointer(path, "id"));
    if (!ids.insert(id).second) {
      throw Error(ErrorKind::kDuplicateId,
                  pointer(path, "id") + ": duplicate instance '" + id + "'");
    }
    const Eigen::VectorXd cond =
        json_vector(inst["condition"], pointer(path, "condition"));
    const long long k = json_integer(inst["k"], pointer(path, "k"));
    const Json &comps = inst["components"];
    if (!comps.is_array()) {
      parse_fail(pointer(path, "components") + ": expected an array");
    }
    if (k < 1 || static_cast<std::size_t>(k) != comps.size()) {
      throw Error(ErrorKind::kShapeMismatch,
                  pointer(path, "k") + ": k=" + std::to_string(k) + " but " +
                      std::to_string(comps.size()) + " components");
    }
    std::vector<MvnComponent> components;
    components.reserve(comps.size());
    for (std::size_t c = 0; c < comps.size(); ++c) {
      const std::string cpath = pointer(pointer(path, "components"), c);
      expect_keys(comps[c], cpath, {"mean", "cov"});
      Eigen::VectorXd mean = json_vector(comps[c]["mean"], pointer(cpath, "mean"));
      if (mean.size() != horizon) {
        throw Error(ErrorKind::kShapeMismatch,
                    pointer(cpath, "mean") + ": expected " +
                        std::to_string(horizon) + " values");
      }
      CovarianceSpec cov =
          parse_covariance(comps[c]["cov"], pointer(cpath, "cov"), dictionaries);
      components.push_back(at_path(
          cpath, [&] { return MvnComponent(std::move(mean), std::move(cov)); }));
    }
    std::vector<double> condition(cond.data(), cond.data() + cond.size());
    if (inst.contains("weights")) {
      Eigen::VectorXd weights =
          json_vector(inst["weights"], pointer(path, "weights"));
      out.push_back(at_path(path, [&] {
        return MixtureForecast(std::move(id), std::move(components),
                               std::move(weights), std::move(condition));
      }));
    } else {
      out.push_back(at_path(path, [&] {
        return MixtureForecast(std::move(id), std::move(components),
                               std::move(condition));
      }));
    }
  }
  return out;
}

std::vector<MixtureForecast> read_model(const std::filesystem::path &path) {
  const std::string text = read_text(path);
  try {
    return parse_model(text);
  } catch (const Error &e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

void write_model(std::span<const MixtureForecast> forecasts,
                 const std::filesystem::path &path) {
  write_text(path, format_model(forecasts));
}

// ---- profiles ----

std::string format_profiles(const Dataset &dataset) {
  const Eigen::Index horizon = dataset.horizon();
  std::vector<std::string> header{"instance_id"};
  for (const auto &n : numbered("t", 1, horizon)) {
    header.push_back(n);
  }
  std::string out;
  append_row(out, header);
  for (const auto &inst : dataset.instances) {
    check_id(inst.id);
    if (inst.profile.size() != horizon) {
      throw Error(ErrorKind::kShapeMismatch,
                  "profile '" + inst.id + "' has a different horizon");
    }
    std::vector<std::string> cells{inst.id};
    for (Eigen::Index t = 0; t < horizon; ++t) {
      cells.push_back(format_double(inst.profile[t]));
    }
    append_row(out, cells);
  }
  return out;
}

std::string format_conditions(const Dataset &dataset) {
  const std::size_t width =
      dataset.instances.empty() ? 0 : dataset.instances.front().condition.size();
  std::vector<std::string> header{"instance_id"};
  for (const auto &n : numbered("c", 1, static_cast<Eigen::Index>(width))) {
    header.push_back(n);
  }
  std::string out;
  append_row(out, header);
  for (const auto &inst : dataset.instances) {
    check_id(inst.id);
    if (inst.condition.size() != width) {
      throw Error(ErrorKind::kShapeMismatch,
                  "condition of '" + inst.id + "' has a different length");
    }
    std::vector<std::string> cells{inst.id};
    for (const double c : inst.condition) {
      cells.push_back(format_double(c));
    }
    append_row(out, cells);
  }
  return out;
}

std::string format_labels(const Dataset &dataset) {
  std::string out = "instance_id,generating_component\n";
  for (const auto &inst : dataset.instances) {
    if (inst.generating_component) {
      check_id(inst.id);
      out += inst.id + "," + std::to_string(*inst.generating_component) + "\n";
    }
  }
  return out;
}

Dataset parse_profiles(std::string_view text, DatasetTag tag) {
  const std::vector<Row> rows = split_csv(text);
  if (rows.empty()) {
    parse_fail("profile table: missing header");
  }
  const Eigen::Index horizon = numbered_width(rows[0], {"instance_id"}, "t", 1);
  Dataset out;
  out.tag = tag;
  std::unordered_set<std::string_view> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Row &row = rows[r];
    expect_width(row, static_cast<std::size_t>(horizon) + 1);
    if (row.cells[0].empty()) {
      parse_fail("line " + std::to_string(row.line) + ": empty instance id");
    }
    if (!ids.insert(row.cells[0]).second) {
      throw Error(ErrorKind::kDuplicateId,
                  "row " + std::to_string(row.line) + ": duplicate id '" +
                      std::string(row.cells[0]) + "'");
    }
    Instance inst;
    inst.id = std::string(row.cells[0]);
    inst.profile.resize(horizon);
    for (Eigen::Index t = 0; t < horizon; ++t) {
      inst.profile[t] = cell_double(row, static_cast<std::size_t>(t) + 1);
    }
    out.instances.push_back(std::move(inst));
  }
  return out;
}

void attach_conditions(Dataset &dataset, std::string_view text) {
  const std::vector<Row> rows = split_csv(text);
  if (rows.empty()) {
    parse_fail("condition table: missing header");
  }
  std::size_t width = 0;
  if (rows[0].cells.size() > 1) {
    width = static_cast<std::size_t>(numbered_width(rows[0], {"instance_id"}, "c", 1));
  } else {
    expect_header(rows[0], std::vector<std::string>{"instance_id"});
  }
  std::unordered_map<std::string, std::vector<double>> table;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Row &row = rows[r];
    expect_width(row, width + 1);
    std::vector<double> values;
    for (std::size_t c = 1; c <= width; ++c) {
      values.push_back(cell_double(row, c));
    }
    if (!table.emplace(std::string(row.cells[0]), std::move(values)).second) {
      throw Error(ErrorKind::kDuplicateId,
                  "row " + std::to_string(row.line) + ": duplicate id '" +
                      std::string(row.cells[0]) + "'");
    }
  }
  if (table.size() != dataset.size()) {
    throw Error(ErrorKind::kShapeMismatch,
                "condition table has " + std::to_string(table.size()) +
                    " rows for " + std::to_string(dataset.size()) +
                    " instances");
  }
  for (auto &inst : dataset.instances) {
    const auto it = table.find(inst.id);
    if (it == table.end()) {
      throw Error(ErrorKind::kShapeMismatch,
                  "condition table has no row for '" + inst.id + "'");
    }
    inst.condition = it->second;
  }
}

void attach_labels(Dataset &dataset, std::string_view text) {
  const std::vector<Row> rows = split_csv(text);
  if (rows.empty()) {
    parse_fail("label table: missing header");
  }
  expect_header(rows[0],
                std::vector<std::string>{"instance_id", "generating_component"});
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t n = 0; n < dataset.size(); ++n) {
    index.emplace(dataset.instances[n].id, n);
  }
  std::unordered_set<std::string_view> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Row &row = rows[r];
    expect_width(row, 2);
    if (!seen.insert(row.cells[0]).second) {
      throw Error(ErrorKind::kDuplicateId,
                  "row " + std::to_string(row.line) + ": duplicate id '" +
                      std::string(row.cells[0]) + "'");
    }
    const auto it = index.find(std::string(row.cells[0]));
    if (it == index.end()) {
      throw Error(ErrorKind::kShapeMismatch,
                  "row " + std::to_string(row.line) + ": unknown instance '" +
                      std::string(row.cells[0]) + "'");
    }
    const long long k = cell_integer(row, 1);
    if (k < 0) {
      parse_fail("line " + std::to_string(row.line) +
                 ": component index must be >= 0");
    }
    dataset.instances[it->second].generating_component = static_cast<int>(k);
  }
}

Dataset read_profiles(const std::filesystem::path &path, DatasetTag tag) {
  const std::string text = read_text(path);
  try {
    return parse_profiles(text, tag);
  } catch (const Error &e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

void write_profiles(const Dataset &dataset, const std::filesystem::path &path) {
  write_text(path, format_profiles(dataset));
}

// ---- ensembles ----

std::string format_ensembles(std::span<const Ensemble> ensembles) {
  if (ensembles.empty()) {
    return "instance_id,trace,component\n";
  }
  const Eigen::Index t_prime = ensembles.front().t_prime;
  const Eigen::Index rest = ensembles.front().remaining();
  std::vector<std::string> header{"instance_id", "trace", "component"};
  for (const auto &n : numbered("t", t_prime + 1, t_prime + rest)) {
    header.push_back(n);
  }
  std::string out;
  append_row(out, header);
  for (const auto &ens : ensembles) {
    check_id(ens.source_id);
    if (ens.t_prime != t_prime || ens.remaining() != rest) {
      throw Error(ErrorKind::kShapeMismatch,
                  "ensemble file: '" + ens.source_id + "' has a different T'");
    }
    for (Eigen::Index s = 0; s < ens.size(); ++s) {
      std::vector<std::string> cells{
          ens.source_id, std::to_string(s),
          std::to_string(ens.components[static_cast<std::size_t>(s)])};
      for (Eigen::Index t = 0; t < rest; ++t) {
        cells.push_back(format_double(ens.trajectories(s, t)));
      }
      append_row(out, cells);
    }
  }
  return out;
}

std::vector<Ensemble> parse_ensembles(std::string_view text) {
  const std::vector<Row> rows = split_csv(text);
  if (rows.empty()) {
    parse_fail("ensemble table: missing header");
  }
  const Row &header = rows[0];
  if (header.cells.size() < 4) {
    if (rows.size() == 1) {
      expect_header(header,
                    std::vector<std::string>{"instance_id", "trace", "component"});
      return {};
    }
    parse_fail("line 1: ensemble header has no value columns");
  }
  const std::string_view first = header.cells[3];
  if (first.size() < 2 || first[0] != 't') {
    parse_fail("line 1: expected a step column after 'component'");
  }
  long long start = 0;
  {
    const auto [ptr, ec] =
        std::from_chars(first.data() + 1, first.data() + first.size(), start);
    if (ec != std::errc() || ptr != first.data() + first.size() || start < 1) {
      parse_fail("line 1: bad step column '" + std::string(first) + "'");
    }
  }
  const Eigen::Index rest =
      numbered_width(header, {"instance_id", "trace", "component"}, "t", start);
  std::vector<Ensemble> out;
  std::map<std::string, std::vector<const Row *>> grouped;
  std::vector<std::string> order;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    expect_width(rows[r], static_cast<std::size_t>(rest) + 3);
    const std::string id(rows[r].cells[0]);
    auto [it, inserted] = grouped.try_emplace(id);
    if (inserted) {
      order.push_back(id);
    }
    it->second.push_back(&rows[r]);
  }
  for (const auto &id : order) {
    const auto &members = grouped[id];
    Ensemble ens;
    ens.source_id = id;
    ens.t_prime = start - 1;
    ens.trajectories.resize(static_cast<Eigen::Index>(members.size()), rest);
    ens.components.resize(members.size());
    for (std::size_t s = 0; s < members.size(); ++s) {
      const Row &row = *members[s];
      if (cell_integer(row, 1) != static_cast<long long>(s)) {
        parse_fail("line " + std::to_string(row.line) + ": expected trace " +
                   std::to_string(s) + " for '" + id + "'");
      }
      ens.components[s] = static_cast<int>(cell_integer(row, 2));
      for (Eigen::Index t = 0; t < rest; ++t) {
        ens.trajectories(static_cast<Eigen::Index>(s), t) =
            cell_double(row, static_cast<std::size_t>(t) + 3);
      }
    }
    out.push_back(std::move(ens));
  }
  return out;
}

void write_ensemble(std::span<const Ensemble> ensembles,
                    const std::filesystem::path &path) {
  write_text(path, format_ensembles(ensembles));
}

// ---- traces and grids ----

std::string format_traces(std::span<const PerformanceTrace> traces) {
  std::string out = "dataset_tag,variant,metric,t_prime,value\n";
  std::set<std::tuple<DatasetTag, Variant, std::string>> keys;
  for (const auto &trace : traces) {
    if (trace.metric.empty() ||
        trace.metric.find_first_of(",\"\r\n") != std::string::npos) {
      throw Error(ErrorKind::kInvalidArgument,
                  "bad metric name '" + trace.metric + "'");
    }
    if (!keys.emplace(trace.dataset, trace.variant, trace.metric).second) {
      throw Error(ErrorKind::kDuplicateId,
                  "trace table: duplicate trace '" + trace.metric + "'");
    }
    const std::string prefix = std::string(to_string(trace.dataset)) + "," +
                               std::string(to_string(trace.variant)) + "," +
                               trace.metric + ",";
    for (const auto &[t_prime, value] : trace.values) {
      out += prefix + std::to_string(t_prime) + "," + format_double(value) +
             "\n";
    }
  }
  return out;
}

std::vector<PerformanceTrace> parse_traces(std::string_view text) {
  const std::vector<Row> rows = split_csv(text);
  if (rows.empty()) {
    parse_fail("trace table: missing header");
  }
  expect_header(rows[0], std::vector<std::string>{"dataset_tag", "variant",
                                                  "metric", "t_prime", "value"});
  std::vector<PerformanceTrace> out;
  std::map<std::tuple<DatasetTag, Variant, std::string>, std::size_t> index;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Row &row = rows[r];
    expect_width(row, 5);
    PerformanceTrace key;
    try {
      key.dataset = parse_dataset_tag(row.cells[0]);
      key.variant = parse_variant(row.cells[1]);
    } catch (const Error &e) {
      parse_fail("line " + std::to_string(row.line) + ": " + e.detail());
    }
    key.metric = std::string(row.cells[2]);
    if (key.metric.empty()) {
      parse_fail("line " + std::to_string(row.line) + ": empty metric");
    }
    auto [it, inserted] = index.try_emplace(
        std::make_tuple(key.dataset, key.variant, key.metric), out.size());
    if (inserted) {
      out.push_back(key);
    }
    const long long t_prime = cell_integer(row, 3);
    const double value = cell_double(row, 4);
    if (!out[it->second].values.emplace(t_prime, value).second) {
      throw Error(ErrorKind::kDuplicateId,
                  "row " + std::to_string(row.line) + ": duplicate T'");
    }
  }
  return out;
}

void write_trace(std::span<const PerformanceTrace> traces,
                 const std::filesystem::path &path) {
  write_text(path, format_traces(traces));
}

std::string format_grids(std::span<const WaterfallGrid> grids) {
  std::string out = "variant,t_prime,t,value\n";
  for (const auto &grid : grids) {
    const std::string prefix = std::string(to_string(grid.variant)) + ",";
    for (const auto &[key, value] : grid.values) {
      out += prefix + std::to_string(key.first) + "," +
             std::to_string(key.second) + "," + format_double(value) + "\n";
    }
  }
  return out;
}

std::vector<WaterfallGrid> parse_grids(std::string_view text) {
  const std::vector<Row> rows = split_csv(text);
  if (rows.empty()) {
    parse_fail("grid table: missing header");
  }
  expect_header(rows[0],
                std::vector<std::string>{"variant", "t_prime", "t", "value"});
  std::vector<WaterfallGrid> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Row &row = rows[r];
    expect_width(row, 4);
    Variant variant{};
    try {
      variant = parse_variant(row.cells[0]);
    } catch (const Error &e) {
      parse_fail("line " + std::to_string(row.line) + ": " + e.detail());
    }
    WaterfallGrid *grid = nullptr;
    for (auto &g : out) {
      if (g.variant == variant) {
        grid = &g;
      }
    }
    if (grid == nullptr) {
      out.push_back(WaterfallGrid{variant, {}});
      grid = &out.back();
    }
    const long long t_prime = cell_integer(row, 1);
    const long long t = cell_integer(row, 2);
    if (t_prime < 0 || t <= t_prime) {
      parse_fail("line " + std::to_string(row.line) +
                 ": grid rows need 0 <= t_prime < t");
    }
    if (!grid->values.emplace(std::make_pair(t_prime, t), cell_double(row, 3))
             .second) {
      throw Error(ErrorKind::kDuplicateId,
                  "row " + std::to_string(row.line) + ": duplicate (t_prime, t)");
    }
  }
  return out;
}

void write_grid(std::span<const WaterfallGrid> grids,
                const std::filesystem::path &path) {
  write_text(path, format_grids(grids));
}

// ---- generator config ----

std::string format_generator_config(const GeneratorConfig &config) {
  Json doc;
  doc["horizon"] = config.horizon;
  doc["latent_dim"] = config.latent_dim;
  doc["base_level"] = config.base_level;
  doc["daily_amplitude"] = config.daily_amplitude;
  doc["second_harmonic"] = config.second_harmonic;
  doc["latent_amplitude"] = config.latent_amplitude;
  doc["smoothness"] = config.smoothness;
  doc["noise_scale"] = config.noise_scale;
  doc["covariance"] =
      config.covariance == CovarianceStyle::kPdcc ? "pdcc" : "diag";
  doc["dictionary_size"] = config.dictionary_size;
  doc["ridge"] = config.ridge;
  doc["pool_size"] = config.pool_size;
  doc["seed"] = config.seed;
  return doc.dump(1) + "\n";
}

GeneratorConfig parse_generator_config(std::string_view text,
                                       GeneratorConfig base) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error &e) {
    parse_fail(e.what());
  }
  expect_keys(doc, "", {},
              {"horizon", "latent_dim", "base_level", "daily_amplitude",
               "second_harmonic", "latent_amplitude", "smoothness",
               "noise_scale", "covariance", "dictionary_size", "ridge",
               "pool_size", "seed"});
  auto integer = [&](const char *key, auto &field) {
    if (doc.contains(key)) {
      const long long v = json_integer(doc[key], pointer("", key));
      if (v < 0) {
        parse_fail(pointer("", key) + ": must be >= 0");
      }
      field = static_cast<std::remove_reference_t<decltype(field)>>(v);
    }
  };
  auto real = [&](const char *key, double &field) {
    if (doc.contains(key)) {
      field = json_double(doc[key], pointer("", key));
    }
  };
  integer("horizon", base.horizon);
  integer("latent_dim", base.latent_dim);
  real("base_level", base.base_level);
  real("daily_amplitude", base.daily_amplitude);
  real("second_harmonic", base.second_harmonic);
  real("latent_amplitude", base.latent_amplitude);
  real("smoothness", base.smoothness);
  real("noise_scale", base.noise_scale);
  integer("dictionary_size", base.dictionary_size);
  real("ridge", base.ridge);
  integer("pool_size", base.pool_size);
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) {
      parse_fail("/seed: expected a non-negative integer");
    }
    base.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("covariance")) {
    const std::string style = json_string(doc["covariance"], "/covariance");
    if (style == "pdcc") {
      base.covariance = CovarianceStyle::kPdcc;
    } else if (style == "diag") {
      base.covariance = CovarianceStyle::kDiagonal;
    } else {
      parse_fail("/covariance: expected 'diag' or 'pdcc'");
    }
  }
  base.validate();
  return base;
}

// ---- tuning report ----

std::string format_tuning_report(const TuningReport &report) {
  Json doc;
  doc["format"] = "intraday-tuning";
  doc["version"] = kModelVersion;
  doc["k_grid"] = Json(report.k_grid);
  doc["k_star"] = report.k_star;
  Json entries = Json::array();
  for (const std::size_t k : report.k_grid) {
    Json entry;
    entry["k"] = k;
    entry["gap"] = report.gap.at(k);
    Json t_primes = Json::array();
    Json best = Json::array();
    Json synth = Json::array();
    const auto &synth_trace = report.synthetic.at(k).values;
    for (const auto &[t_prime, value] : report.best_case.at(k).values) {
      t_primes.push_back(t_prime);
      best.push_back(value);
      synth.push_back(synth_trace.at(t_prime));
    }
    entry["t_prime"] = std::move(t_primes);
    entry["nll_best_case"] = std::move(best);
    entry["nll_synthetic"] = std::move(synth);
    entries.push_back(std::move(entry));
  }
  doc["entries"] = std::move(entries);
  return doc.dump(1) + "\n";
}

TuningReport parse_tuning_report(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error &e) {
    parse_fail(e.what());
  }
  expect_keys(doc, "", {"format", "version", "k_grid", "k_star", "entries"});
  if (json_string(doc["format"], "/format") != "intraday-tuning") {
    parse_fail("/format: expected 'intraday-tuning'");
  }
  if (json_integer(doc["version"], "/version") != kModelVersion) {
    throw Error(ErrorKind::kVersionMismatch, "/version: unsupported");
  }
  TuningReport report;
  const Json &grid = doc["k_grid"];
  if (!grid.is_array()) {
    parse_fail("/k_grid: expected an array");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    report.k_grid.push_back(
        static_cast<std::size_t>(json_integer(grid[i], pointer("/k_grid", i))));
  }
  report.k_star =
      static_cast<std::size_t>(json_integer(doc["k_star"], "/k_star"));
  const Json &entries = doc["entries"];
  if (!entries.is_array()) {
    parse_fail("/entries: expected an array");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string path = pointer("/entries", i);
    const Json &e = entries[i];
    expect_keys(e, path,
                {"k", "gap", "t_prime", "nll_best_case", "nll_synthetic"});
    const auto k = static_cast<std::size_t>(json_integer(e["k"], pointer(path, "k")));
    report.gap[k] = json_double(e["gap"], pointer(path, "gap"));
    const Eigen::VectorXd best =
        json_vector(e["nll_best_case"], pointer(path, "nll_best_case"));
    const Eigen::VectorXd synth =
        json_vector(e["nll_synthetic"], pointer(path, "nll_synthetic"));
    const Json &tp = e["t_prime"];
    if (!tp.is_array() || tp.size() != static_cast<std::size_t>(best.size()) ||
        best.size() != synth.size()) {
      parse_fail(path + ": trace arrays differ in length");
    }
    PerformanceTrace b{"nll", Variant::kUpdated, DatasetTag::kBestCase, {}};
    PerformanceTrace s{"nll", Variant::kUpdated, DatasetTag::kSynthetic, {}};
    for (std::size_t j = 0; j < tp.size(); ++j) {
      const auto t_prime = static_cast<Eigen::Index>(
          json_integer(tp[j], pointer(pointer(path, "t_prime"), j)));
      b.values[t_prime] = best[static_cast<Eigen::Index>(j)];
      s.values[t_prime] = synth[static_cast<Eigen::Index>(j)];
    }
    report.best_case[k] = std::move(b);
    report.synthetic[k] = std::move(s);
  }
  return report;
}

} // namespace intraday::io
