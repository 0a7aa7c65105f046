#include "moeco/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "moeco/error.hpp"
#include "moeco/rng.hpp"

namespace moeco {

std::string FeatureSchema::id() const {
  std::string joined;
  for (const auto& n : names) {
    joined += n;
    joined += '\x1f';
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(joined)));
  return "fs" + std::to_string(names.size()) + "-" + buf;
}

FeatureSchema FeatureSchema::principal_components(std::size_t k) {
  FeatureSchema s;
  for (std::size_t i = 0; i < k; ++i) s.names.push_back("pc" + std::to_string(i + 1));
  return s;
}

FeatureVector::FeatureVector(const FeatureSchema& schema, std::vector<double> values)
    : FeatureVector(schema.id(), std::move(values)) {
  if (values_.size() != schema.dimension()) {
    throw Error(ErrorCode::SchemaMismatch, "feature vector has " + std::to_string(values_.size()) +
                                               " values, schema declares " +
                                               std::to_string(schema.dimension()));
  }
}

FeatureVector::FeatureVector(std::string schema_id, std::vector<double> values)
    : schema_id_(std::move(schema_id)), values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::DomainError, "feature " + std::to_string(i) + " is not finite");
    }
  }
}

std::string to_string(ScalingMode mode) {
  return mode == ScalingMode::MinMax ? "minmax" : "zscore";
}

ScalingMode scaling_mode_from_string(const std::string& s) {
  if (s == "minmax") return ScalingMode::MinMax;
  if (s == "zscore") return ScalingMode::ZScore;
  throw Error(ErrorCode::UsageError, "unknown scaling mode '" + s + "'");
}

namespace {

void check_samples(std::span<const FeatureVector> samples) {
  if (samples.size() < 2) {
    throw Error(ErrorCode::InsufficientData,
                "need at least 2 samples, got " + std::to_string(samples.size()));
  }
  const auto& first = samples.front();
  for (const auto& s : samples) {
    if (s.schema_id() != first.schema_id() || s.size() != first.size()) {
      throw Error(ErrorCode::SchemaMismatch, "samples mix schemas '" + first.schema_id() +
                                                 "' and '" + s.schema_id() + "'");
    }
  }
}

}  // namespace

ScalingParams fit_scaler(std::span<const FeatureVector> samples, ScalingMode mode) {
  check_samples(samples);
  const std::size_t dim = samples.front().size();
  ScalingParams p;
  p.mode = mode;
  p.schema_id = samples.front().schema_id();
  p.lo.assign(dim, 0.0);
  p.hi.assign(dim, 0.0);

  if (mode == ScalingMode::MinMax) {
    p.lo = samples.front().values();
    p.hi = samples.front().values();
    for (const auto& s : samples) {
      for (std::size_t i = 0; i < dim; ++i) {
        p.lo[i] = std::min(p.lo[i], s[i]);
        p.hi[i] = std::max(p.hi[i], s[i]);
      }
    }
    return p;
  }

  const double n = static_cast<double>(samples.size());
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < dim; ++i) p.lo[i] += s[i];
  }
  for (auto& m : p.lo) m /= n;
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = s[i] - p.lo[i];
      p.hi[i] += d * d;
    }
  }
  for (auto& v : p.hi) v = std::sqrt(v / n);
  return p;
}

ScaleResult scale(const FeatureVector& v, const ScalingParams& params) {
  if (v.schema_id() != params.schema_id || v.size() != params.dimension()) {
    throw Error(ErrorCode::SchemaMismatch,
                "vector schema '" + v.schema_id() + "' does not match scaler '" +
                    params.schema_id + "'");
  }
  std::vector<double> out(v.size());
  bool zero_range = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (params.mode == ScalingMode::MinMax) {
      const double range = params.hi[i] - params.lo[i];
      if (range > 0.0) {
        out[i] = (v[i] - params.lo[i]) / range;
      } else {
        zero_range = true;
      }
    } else {
      if (params.hi[i] > 0.0) {
        out[i] = (v[i] - params.lo[i]) / params.hi[i];
      } else {
        zero_range = true;
      }
    }
  }
  return {FeatureVector(v.schema_id(), std::move(out)), zero_range};
}

}  // namespace moeco
