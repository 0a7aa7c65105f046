#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "moeco/error.hpp"
#include "moeco/features.hpp"
#include "moeco/simd/kernels.hpp"

namespace moeco {

double PcaModel::explained_total() const {
  double s = 0.0;
  for (double e : explained) s += e;
  return s;
}

PcaModel fit_pca(std::span<const FeatureVector> samples, double variance_target) {
  if (!(variance_target > 0.0 && variance_target <= 1.0)) {
    throw Error(ErrorCode::DomainError, "variance target must lie in (0, 1]");
  }
  if (samples.size() < 2) {
    throw Error(ErrorCode::InsufficientData,
                "PCA needs at least 2 samples, got " + std::to_string(samples.size()));
  }
  const std::size_t n = samples.size();
  const std::size_t dim = samples.front().size();
  if (dim == 0) throw Error(ErrorCode::InsufficientData, "PCA needs at least one feature");
  for (const auto& s : samples) {
    if (s.schema_id() != samples.front().schema_id() || s.size() != dim) {
      throw Error(ErrorCode::SchemaMismatch, "PCA samples mix schemas");
    }
  }

  PcaModel model;
  model.input_schema_id = samples.front().schema_id();
  model.variance_target = variance_target;
  model.mean.assign(dim, 0.0);
  for (const auto& s : samples) simd::axpy(1.0, s.span(), model.mean);
  for (auto& m : model.mean) m /= static_cast<double>(n);

  Eigen::MatrixXd centred(n, dim);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < dim; ++c) centred(r, c) = samples[r][c] - model.mean[c];
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();

  // Population variance along each singular direction is s^2 / n.
  std::vector<double> variance(sv.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    variance[i] = sv[i] * sv[i] / static_cast<double>(n);
    total += variance[i];
  }
  if (total <= 0.0) return model;  // every sample identical: nothing to retain

  const double negligible = 1e-12 * total;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < variance.size(); ++i) {
    if (variance[i] <= negligible) break;
    const double frac = variance[i] / total;
    cumulative += frac;
    model.explained.push_back(frac);

    std::vector<double> row(dim);
    std::size_t pivot = 0;
    for (std::size_t c = 0; c < dim; ++c) {
      row[c] = v(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i));
      if (std::abs(row[c]) > std::abs(row[pivot])) pivot = c;
    }
    if (row[pivot] < 0.0) {
      for (auto& x : row) x = -x;
    }
    model.components.insert(model.components.end(), row.begin(), row.end());
    ++model.k;

    if (cumulative >= variance_target - 1e-12) break;
  }
  return model;
}

FeatureVector project(const FeatureVector& v, const PcaModel& model) {
  if (v.schema_id() != model.input_schema_id || v.size() != model.dimension()) {
    throw Error(ErrorCode::SchemaMismatch, "vector schema '" + v.schema_id() +
                                               "' does not match PCA input '" +
                                               model.input_schema_id + "'");
  }
  std::vector<double> centred = v.values();
  simd::axpy(-1.0, model.mean, centred);
  std::vector<double> out(model.k);
  for (std::size_t i = 0; i < model.k; ++i) out[i] = simd::dot(model.component(i), centred);
  return FeatureVector(FeatureSchema::principal_components(model.k).id(), std::move(out));
}

std::vector<double> reconstruct(std::span<const double> pcs, const PcaModel& model) {
  if (pcs.size() != model.k) {
    throw Error(ErrorCode::SchemaMismatch, "expected " + std::to_string(model.k) + " components");
  }
  std::vector<double> out = model.mean;
  for (std::size_t i = 0; i < model.k; ++i) simd::axpy(pcs[i], model.component(i), out);
  return out;
}

}  // namespace moeco
