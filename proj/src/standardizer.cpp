#include <cmath>

#include "phasor_sentinel/svm.hpp"

namespace phasor_sentinel {

void FeatureMatrix::append(std::span<const double> x) {
  if (x.size() != dim) throw ValidationError("feature dimension mismatch");
  values.insert(values.end(), x.begin(), x.end());
}

void LabeledSet::append(const LabeledSet& other) {
  if (x.dim == 0) x.dim = other.x.dim;
  if (other.size() > 0 && other.x.dim != x.dim) throw ValidationError("feature dimension mismatch");
  x.values.insert(x.values.end(), other.x.values.begin(), other.x.values.end());
  y.insert(y.end(), other.y.begin(), other.y.end());
  minute.insert(minute.end(), other.minute.begin(), other.minute.end());
  cycle.insert(cycle.end(), other.cycle.begin(), other.cycle.end());
  pmu_i.insert(pmu_i.end(), other.pmu_i.begin(), other.pmu_i.end());
  pmu_j.insert(pmu_j.end(), other.pmu_j.begin(), other.pmu_j.end());
}

Standardizer fit_standardizer(const FeatureMatrix& x) {
  const std::size_t n = x.rows();
  if (n < 2) throw ValidationError("standardizer needs at least 2 examples");
  const std::size_t d = x.dim;
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    for (std::size_t k = 0; k < d; ++k) s.mean[k] += r[k];
  }
  for (auto& m : s.mean) m /= static_cast<double>(n);
  std::vector<double> ss(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    for (std::size_t k = 0; k < d; ++k) {
      const double c = r[k] - s.mean[k];
      ss[k] += c * c;
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    const double sd = std::sqrt(ss[k] / static_cast<double>(n));
    if (sd > 1e-12 * std::max(1.0, std::abs(s.mean[k]))) {
      s.scale[k] = sd;
    } else {
      s.scale[k] = 1.0;
      s.mean[k] = 0.0;
      s.constant_features.push_back(k);
    }
  }
  return s;
}

void Standardizer::apply_in_place(std::span<double> x) const {
  if (x.size() != dim()) throw ValidationError("feature dimension mismatch");
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = (x[k] - mean[k]) / scale[k];
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  std::vector<double> out(x.begin(), x.end());
  apply_in_place(out);
  return out;
}

void Standardizer::apply_in_place(FeatureMatrix& m) const {
  if (m.dim != dim()) throw ValidationError("feature dimension mismatch");
  for (std::size_t i = 0; i < m.rows(); ++i) apply_in_place(m.row(i));
}

std::vector<double> Standardizer::inverse(std::span<const double> z) const {
  if (z.size() != dim()) throw ValidationError("feature dimension mismatch");
  std::vector<double> out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k] * scale[k] + mean[k];
  return out;
}

}  // namespace phasor_sentinel
