#include <fstream>
#include <sstream>

#include "json.hpp"
#include "moeco/error.hpp"
#include "moeco/registry.hpp"

namespace moeco {

using nlohmann::json;

namespace {

json vector_json(const std::vector<double>& v) { return json(v); }

json record_json(const TrainingRecord& r) {
  return json{{"id", r.id},
              {"name", r.name},
              {"checksum_md5", r.checksum},
              {"raw_features", vector_json(r.raw_features.values())},
              {"pc_features", vector_json(r.pc_features.values())},
              {"function", {{"family", to_string(r.function.family)},
                            {"m", r.function.m},
                            {"b", r.function.b}}},
              {"calibrated", r.calibrated},
              {"cpu_load", r.cpu_load}};
}

// Walks a parsed document, reporting the dotted path of whatever is missing
// or mistyped.
class Field {
 public:
  Field(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  Field operator[](const char* key) const {
    const std::string p = path_.empty() ? key : path_ + "." + key;
    if (!node_.is_object()) fail("expected an object");
    auto it = node_.find(key);
    if (it == node_.end()) throw Error(ErrorCode::ParseError, "missing field '" + p + "'");
    return Field(*it, p);
  }
  Field operator[](std::size_t i) const {
    return Field(node_.at(i), path_ + "[" + std::to_string(i) + "]");
  }

  std::size_t size() const {
    if (!node_.is_array()) fail("expected an array");
    return node_.size();
  }
  double number() const {
    if (!node_.is_number()) fail("expected a number");
    return node_.get<double>();
  }
  std::uint64_t unsigned_int() const {
    if (!node_.is_number_unsigned() && !(node_.is_number_integer() && node_.get<long long>() >= 0)) {
      fail("expected a non-negative integer");
    }
    return node_.get<std::uint64_t>();
  }
  std::string string() const {
    if (!node_.is_string()) fail("expected a string");
    return node_.get<std::string>();
  }
  bool boolean() const {
    if (!node_.is_boolean()) fail("expected a boolean");
    return node_.get<bool>();
  }
  std::vector<double> numbers() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)[i].number();
    return out;
  }
  bool has(const char* key) const { return node_.is_object() && node_.contains(key); }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ParseError, "field '" + path_ + "': " + what);
  }

 private:
  const json& node_;
  std::string path_;
};

std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::string to_json_text(const Registry& reg) {
  json doc;
  doc["version"] = kRegistryFormatVersion;
  doc["schema"] = reg.schema().names;

  const auto& s = reg.scaling();
  json stats;
  if (s.mode == ScalingMode::MinMax) {
    stats = {{"min", s.lo}, {"max", s.hi}};
  } else {
    stats = {{"mean", s.lo}, {"sd", s.hi}};
  }
  doc["scaling"] = {{"mode", to_string(s.mode)}, {"stats", stats}};

  const auto& p = reg.pca();
  json components = json::array();
  for (std::size_t i = 0; i < p.k; ++i) {
    auto row = p.component(i);
    components.push_back(std::vector<double>(row.begin(), row.end()));
  }
  doc["pca"] = {{"mean", p.mean},
                {"components", components},
                {"explained", p.explained},
                {"variance_target", p.variance_target}};
  doc["threshold"] = reg.knn_threshold();

  json records = json::array();
  for (const auto& r : reg.records()) records.push_back(record_json(r));
  doc["records"] = records;
  return doc.dump(2) + "\n";
}

Registry registry_from_json_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                "malformed registry at " + line_context(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  const Field root(doc, "");
  const auto version = root["version"].unsigned_int();
  if (version != static_cast<std::uint64_t>(kRegistryFormatVersion)) {
    throw Error(ErrorCode::VersionError, "registry version " + std::to_string(version) +
                                             " is not supported (expected " +
                                             std::to_string(kRegistryFormatVersion) + ")");
  }

  FeatureSchema schema;
  const Field names = root["schema"];
  for (std::size_t i = 0; i < names.size(); ++i) schema.names.push_back(names[i].string());
  const std::string sid = schema.id();

  ScalingParams scaling;
  scaling.schema_id = sid;
  const Field sc = root["scaling"];
  const std::string mode = sc["mode"].string();
  if (mode != "minmax" && mode != "zscore") sc["mode"].fail("unknown scaling mode '" + mode + "'");
  scaling.mode = scaling_mode_from_string(mode);
  if (scaling.mode == ScalingMode::MinMax) {
    scaling.lo = sc["stats"]["min"].numbers();
    scaling.hi = sc["stats"]["max"].numbers();
  } else {
    scaling.lo = sc["stats"]["mean"].numbers();
    scaling.hi = sc["stats"]["sd"].numbers();
  }
  if (scaling.lo.size() != schema.dimension() || scaling.hi.size() != schema.dimension()) {
    sc["stats"].fail("dimension differs from schema");
  }

  PcaModel pca;
  pca.input_schema_id = sid;
  const Field pf = root["pca"];
  pca.mean = pf["mean"].numbers();
  pca.explained = pf["explained"].numbers();
  pca.variance_target = pf["variance_target"].number();
  const Field comps = pf["components"];
  pca.k = comps.size();
  for (std::size_t i = 0; i < pca.k; ++i) {
    auto row = comps[i].numbers();
    if (row.size() != pca.mean.size()) comps[i].fail("component length differs from mean");
    pca.components.insert(pca.components.end(), row.begin(), row.end());
  }
  if (pca.explained.size() != pca.k) pf["explained"].fail("one fraction per component expected");

  const std::string pc_sid = FeatureSchema::principal_components(pca.k).id();
  std::vector<TrainingRecord> records;
  const Field recs = root["records"];
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const Field rf = recs[i];
    TrainingRecord r;
    r.id = rf["id"].unsigned_int();
    r.name = rf["name"].string();
    r.checksum = rf["checksum_md5"].string();
    try {
      r.raw_features = FeatureVector(schema, rf["raw_features"].numbers());
      r.pc_features = FeatureVector(pc_sid, rf["pc_features"].numbers());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) throw;
      rf.fail(e.message());
    }
    const Field fn = rf["function"];
    const std::string fam = fn["family"].string();
    try {
      r.function.family = family_from_string(fam);
    } catch (const Error&) {
      fn["family"].fail("unknown family '" + fam + "'");
    }
    r.function.m = fn["m"].number();
    r.function.b = fn["b"].number();
    r.calibrated = rf.has("calibrated") ? rf["calibrated"].boolean() : true;
    r.cpu_load = rf.has("cpu_load") ? rf["cpu_load"].number() : 0.0;
    records.push_back(std::move(r));
  }

  try {
    return Registry(std::move(schema), std::move(scaling), std::move(pca), std::move(records),
                    root["threshold"].number());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ParseError, "inconsistent registry: " + e.message());
  }
}

void save(const Registry& registry, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::UsageError, "cannot write '" + path.string() + "'");
  out << to_json_text(registry);
  if (!out) throw Error(ErrorCode::UsageError, "failed writing '" + path.string() + "'");
}

Registry load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UsageError, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return registry_from_json_text(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.message());
  }
}

}  // namespace moeco
