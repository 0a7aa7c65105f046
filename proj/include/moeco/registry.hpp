#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "moeco/experts.hpp"
#include "moeco/features.hpp"

namespace moeco {

struct TrainingRecord {
  std::uint64_t id = 0;
  std::string name;
  std::string checksum;  // 32 lowercase hex characters
  FeatureVector raw_features;
  FeatureVector pc_features;
  MemoryFunction function;
  bool calibrated = true;  // false: only the family is known, coefficients are placeholders
  double cpu_load = 0.0;   // average CPU share observed while profiling

  bool operator==(const TrainingRecord&) const = default;
};

// One known program used to build the expert database.
struct CorpusEntry {
  std::string name;
  std::string checksum;
  FeatureVector features;
  std::vector<Point> curve;  // (input GB, footprint GB)
  double cpu_load = 0.0;
};

struct TrainOptions {
  ScalingMode scaling = ScalingMode::MinMax;
  double variance_target = 0.95;
  double knn_threshold = 1.0;
};

struct Neighbor {
  std::size_t index = 0;  // into Registry::records()
  double distance = 0.0;
};

struct ExpertChoice {
  enum class Kind { Selected, TooFar };
  Kind kind = Kind::TooFar;
  Neighbor nearest;

  bool selected() const { return kind == Kind::Selected; }
};

bool is_valid_checksum(std::string_view checksum);

// The expert database: feature transforms plus one record per known program.
// Values are immutable; adding a record yields a new Registry.
class Registry {
 public:
  Registry() = default;
  Registry(FeatureSchema schema, ScalingParams scaling, PcaModel pca,
           std::vector<TrainingRecord> records, double knn_threshold);

  static Registry train(const FeatureSchema& schema, std::span<const CorpusEntry> corpus,
                        const TrainOptions& options = {});

  const FeatureSchema& schema() const { return schema_; }
  const ScalingParams& scaling() const { return scaling_; }
  const PcaModel& pca() const { return pca_; }
  const std::vector<TrainingRecord>& records() const { return records_; }
  double knn_threshold() const { return knn_threshold_; }
  bool empty() const { return records_.empty(); }

  const TrainingRecord* lookup_checksum(std::string_view checksum) const;

  // Scale then project a raw feature vector into the registry's PC space.
  FeatureVector to_pc_space(const FeatureVector& raw) const;

  // Euclidean nearest record in PC space; ties go to the lowest id.
  Neighbor nearest(const FeatureVector& pc_features) const;
  // Selected iff the nearest distance is <= knn_threshold.
  ExpertChoice select_expert(const FeatureVector& pc_features) const;

  // Appends `record` with the next free id. Throws DuplicateProgram if the
  // checksum is already present.
  Registry with_record(TrainingRecord record) const;
  // Replaces the coefficients of record `index` and marks it calibrated.
  Registry with_function(std::size_t index, const MemoryFunction& function) const;
  Registry with_threshold(double knn_threshold) const;

  bool operator==(const Registry& other) const;

 private:
  void index();

  FeatureSchema schema_;
  ScalingParams scaling_;
  PcaModel pca_;
  std::vector<TrainingRecord> records_;
  double knn_threshold_ = 1.0;

  std::vector<double> pc_rows_;  // records' pc features, row-major
  std::unordered_map<std::string, std::size_t> by_checksum_;
};

inline constexpr int kRegistryFormatVersion = 1;

std::string to_json_text(const Registry& registry);
Registry registry_from_json_text(std::string_view text);

void save(const Registry& registry, const std::filesystem::path& path);
Registry load(const std::filesystem::path& path);

}  // namespace moeco
