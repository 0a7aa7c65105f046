#include "moeco/registry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "moeco/error.hpp"
#include "moeco/simd/kernels.hpp"

namespace moeco {

bool is_valid_checksum(std::string_view checksum) {
  return checksum.size() == 32 && std::all_of(checksum.begin(), checksum.end(), [](char c) {
           return std::isdigit(static_cast<unsigned char>(c)) || (c >= 'a' && c <= 'f');
         });
}

Registry::Registry(FeatureSchema schema, ScalingParams scaling, PcaModel pca,
                   std::vector<TrainingRecord> records, double knn_threshold)
    : schema_(std::move(schema)),
      scaling_(std::move(scaling)),
      pca_(std::move(pca)),
      records_(std::move(records)),
      knn_threshold_(knn_threshold) {
  if (!(knn_threshold_ > 0.0) || !std::isfinite(knn_threshold_)) {
    throw Error(ErrorCode::DomainError, "knn threshold must be positive");
  }
  const std::string sid = schema_.id();
  if (scaling_.schema_id != sid || scaling_.dimension() != schema_.dimension()) {
    throw Error(ErrorCode::SchemaMismatch, "scaling parameters do not match the feature schema");
  }
  if (pca_.input_schema_id != sid || pca_.dimension() != schema_.dimension()) {
    throw Error(ErrorCode::SchemaMismatch, "PCA model does not match the feature schema");
  }
  index();
}

void Registry::index() {
  pc_rows_.clear();
  by_checksum_.clear();
  const std::string sid = schema_.id();
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!is_valid_checksum(r.checksum)) {
      throw Error(ErrorCode::DomainError, "record '" + r.name + "' has malformed checksum '" +
                                              r.checksum + "'");
    }
    if (!by_checksum_.emplace(r.checksum, i).second) {
      throw Error(ErrorCode::DuplicateProgram, "checksum " + r.checksum + " appears twice ('" +
                                                   r.name + "')");
    }
    if (r.raw_features.schema_id() != sid || r.raw_features.size() != schema_.dimension()) {
      throw Error(ErrorCode::SchemaMismatch, "record '" + r.name + "' raw features off-schema");
    }
    if (r.pc_features.size() != pca_.k) {
      throw Error(ErrorCode::SchemaMismatch, "record '" + r.name + "' has " +
                                                 std::to_string(r.pc_features.size()) +
                                                 " PCs, registry keeps " + std::to_string(pca_.k));
    }
    pc_rows_.insert(pc_rows_.end(), r.pc_features.values().begin(), r.pc_features.values().end());
  }
}

Registry Registry::train(const FeatureSchema& schema, std::span<const CorpusEntry> corpus,
                         const TrainOptions& options) {
  if (corpus.size() < 2) {
    throw Error(ErrorCode::InsufficientData,
                "training needs at least 2 programs, got " + std::to_string(corpus.size()));
  }
  std::unordered_set<std::string> seen;
  std::vector<FeatureVector> raw;
  raw.reserve(corpus.size());
  for (const auto& e : corpus) {
    if (!seen.insert(e.checksum).second) {
      throw Error(ErrorCode::DuplicateProgram,
                  "program '" + e.name + "' repeats checksum " + e.checksum);
    }
    if (e.features.schema_id() != schema.id() || e.features.size() != schema.dimension()) {
      throw Error(ErrorCode::SchemaMismatch, "program '" + e.name + "' features off-schema");
    }
    raw.push_back(e.features);
  }

  ScalingParams scaling = fit_scaler(raw, options.scaling);
  std::vector<FeatureVector> scaled;
  scaled.reserve(raw.size());
  for (const auto& v : raw) scaled.push_back(scale(v, scaling).features);
  PcaModel pca = fit_pca(scaled, options.variance_target);

  std::vector<TrainingRecord> records;
  records.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& e = corpus[i];
    TrainingRecord r;
    r.id = i;
    r.name = e.name;
    r.checksum = e.checksum;
    r.raw_features = e.features;
    r.pc_features = project(scaled[i], pca);
    try {
      r.function = select_best_fit(e.curve).winner.function;
    } catch (const Error& err) {
      throw Error(err.code(), "program '" + e.name + "': " + err.message());
    }
    r.calibrated = true;
    r.cpu_load = e.cpu_load;
    records.push_back(std::move(r));
  }
  return Registry(schema, std::move(scaling), std::move(pca), std::move(records),
                  options.knn_threshold);
}

const TrainingRecord* Registry::lookup_checksum(std::string_view checksum) const {
  auto it = by_checksum_.find(std::string(checksum));
  return it == by_checksum_.end() ? nullptr : &records_[it->second];
}

FeatureVector Registry::to_pc_space(const FeatureVector& raw) const {
  return project(scale(raw, scaling_).features, pca_);
}

Neighbor Registry::nearest(const FeatureVector& pc_features) const {
  if (records_.empty()) throw Error(ErrorCode::EmptyRegistry, "registry has no records");
  if (pc_features.size() != pca_.k) {
    throw Error(ErrorCode::SchemaMismatch, "query has " + std::to_string(pc_features.size()) +
                                               " PCs, registry keeps " + std::to_string(pca_.k));
  }
  std::vector<double> d2(records_.size());
  simd::squared_distances(pc_features.span(), pc_rows_, d2);
  Neighbor best{0, d2[0]};
  for (std::size_t i = 1; i < d2.size(); ++i) {
    if (d2[i] < best.distance ||
        (d2[i] == best.distance && records_[i].id < records_[best.index].id)) {
      best = {i, d2[i]};
    }
  }
  best.distance = std::sqrt(best.distance);
  return best;
}

ExpertChoice Registry::select_expert(const FeatureVector& pc_features) const {
  const Neighbor n = nearest(pc_features);
  return {n.distance <= knn_threshold_ ? ExpertChoice::Kind::Selected : ExpertChoice::Kind::TooFar,
          n};
}

Registry Registry::with_record(TrainingRecord record) const {
  if (lookup_checksum(record.checksum) != nullptr) {
    throw Error(ErrorCode::DuplicateProgram, "checksum " + record.checksum + " already known");
  }
  std::uint64_t next = 0;
  for (const auto& r : records_) next = std::max(next, r.id + 1);
  record.id = next;
  Registry out = *this;
  out.records_.push_back(std::move(record));
  out.index();
  return out;
}

Registry Registry::with_function(std::size_t index, const MemoryFunction& function) const {
  if (index >= records_.size()) throw Error(ErrorCode::StateError, "no record at that index");
  Registry out = *this;
  out.records_[index].function = function;
  out.records_[index].calibrated = true;
  return out;
}

Registry Registry::with_threshold(double knn_threshold) const {
  return Registry(schema_, scaling_, pca_, records_, knn_threshold);
}

bool Registry::operator==(const Registry& other) const {
  return schema_ == other.schema_ && scaling_ == other.scaling_ && pca_ == other.pca_ &&
         records_ == other.records_ && knn_threshold_ == other.knn_threshold_;
}

}  // namespace moeco
