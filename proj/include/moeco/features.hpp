#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace moeco {

// Named, ordered feature columns. Two vectors are comparable only when they
// carry the same schema id.
struct FeatureSchema {
  std::vector<std::string> names;

  std::size_t dimension() const { return names.size(); }
  std::string id() const;

  static FeatureSchema principal_components(std::size_t k);

  bool operator==(const FeatureSchema&) const = default;
};

class FeatureVector {
 public:
  FeatureVector() = default;
  // Throws SchemaMismatch on length mismatch and DomainError on non-finite values.
  FeatureVector(const FeatureSchema& schema, std::vector<double> values);
  FeatureVector(std::string schema_id, std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  std::span<const double> span() const { return values_; }
  const std::string& schema_id() const { return schema_id_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const FeatureVector&) const = default;

 private:
  std::string schema_id_;
  std::vector<double> values_;
};

enum class ScalingMode { MinMax, ZScore };

std::string to_string(ScalingMode mode);
ScalingMode scaling_mode_from_string(const std::string& s);

// For MinMax `lo`/`hi` hold per-feature min and max; for ZScore they hold the
// mean and population standard deviation.
struct ScalingParams {
  ScalingMode mode = ScalingMode::MinMax;
  std::string schema_id;
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dimension() const { return lo.size(); }
  bool operator==(const ScalingParams&) const = default;
};

struct ScaleResult {
  FeatureVector features;
  // Set when some feature had zero range (max == min or sigma == 0) and was mapped to 0.
  bool zero_range = false;
};

ScalingParams fit_scaler(std::span<const FeatureVector> samples, ScalingMode mode);
ScaleResult scale(const FeatureVector& v, const ScalingParams& params);

struct PcaModel {
  std::string input_schema_id;
  std::vector<double> mean;
  // k rows of length dimension(), row-major, each unit length.
  std::vector<double> components;
  std::vector<double> explained;  // per retained component, fraction of total variance
  double variance_target = 0.95;
  std::size_t k = 0;

  std::size_t dimension() const { return mean.size(); }
  std::span<const double> component(std::size_t i) const {
    return std::span<const double>(components).subspan(i * dimension(), dimension());
  }
  double explained_total() const;

  bool operator==(const PcaModel&) const = default;
};

// Rows of `samples` are observations. Components come from the SVD of the
// centred sample matrix; variances use the population (1/n) convention.
PcaModel fit_pca(std::span<const FeatureVector> samples, double variance_target);

FeatureVector project(const FeatureVector& v, const PcaModel& model);
// mean + components^T * pcs, in the model's input space.
std::vector<double> reconstruct(std::span<const double> pcs, const PcaModel& model);

}  // namespace moeco
