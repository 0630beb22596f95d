#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phasor_sentinel/error.hpp"
#include "phasor_sentinel/metrics.hpp"

namespace phasor_sentinel {

/// Dense row-major matrix of feature vectors.
struct FeatureMatrix {
  std::size_t dim = 0;
  std::vector<double> values;

  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t d) : dim(d) {}

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }
  void append(std::span<const double> x);
};

enum class Label : int { Normal = -1, Spoofed = 1 };

/// Labeled correlation examples, stored column-wise. Provenance columns
/// (minute, cycle, pair) travel with each row.
struct LabeledSet {
  FeatureMatrix x;
  std::vector<int> y;  // -1 Normal, +1 Spoofed
  std::vector<int> minute;
  std::vector<std::int64_t> cycle;
  std::vector<int> pmu_i;
  std::vector<int> pmu_j;

  std::size_t size() const { return y.size(); }
  void append(const LabeledSet& other);
};

/// Per-feature affine map to zero mean, unit population standard deviation.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;
  /// Features whose training variance was zero; they pass through with scale 1.
  std::vector<std::size_t> constant_features;

  std::size_t dim() const { return mean.size(); }
  std::vector<double> apply(std::span<const double> x) const;
  void apply_in_place(std::span<double> x) const;
  void apply_in_place(FeatureMatrix& m) const;
  std::vector<double> inverse(std::span<const double> z) const;
};

/// Throws ValidationError for fewer than two rows.
Standardizer fit_standardizer(const FeatureMatrix& x);

/// exp(-gamma * |x - y|^2).
double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma);

struct SvmParams {
  double C = 1.0;
  double gamma = 0.2;
  /// Stop once the maximal KKT violation m(a) - M(a) drops below tol.
  double tol = 1e-3;
  /// Iteration cap as a multiple of the training-set size.
  int max_passes = 1000;
  /// Per-class multipliers on C. Both 1 reproduces the unweighted problem.
  double weight_spoofed = 1.0;
  double weight_normal = 1.0;
  /// Kernel row cache budget.
  std::size_t cache_mb = 512;
};

/// Thrown when SMO hits its iteration cap. Carries the best-so-far state.
class ConvergenceError : public RuntimeError {
 public:
  ConvergenceError(const std::string& what, std::int64_t iterations, double violation, double objective)
      : RuntimeError(what), iterations(iterations), violation(violation), objective(objective) {}
  std::int64_t iterations;
  double violation;
  double objective;
};

struct DualSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  /// Dual objective sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij (maximized).
  double objective = 0.0;
  std::int64_t iterations = 0;
  double violation = 0.0;
};

/// SMO on already-standardized features: working set of two chosen as the
/// maximal KKT-violating pair, full gradient (error) cache, no shrinking.
DualSolution solve_dual(const FeatureMatrix& x, std::span<const int> y, const SvmParams& params);

/// Dual objective of an arbitrary alpha; used to compare solvers.
double dual_objective(const FeatureMatrix& x, std::span<const int> y, std::span<const double> alpha,
                      double gamma);

struct ModelMetadata {
  std::string spoof;
  std::string feature_set;
  int window = 300;
  std::string timing = "late";
  int stride = 1;
  std::vector<int> train_minutes;
  std::int64_t train_examples = 0;
};

struct TrainingDiagnostics {
  std::int64_t iterations = 0;
  double violation = 0.0;
  double objective = 0.0;
  std::size_t bounded_support_vectors = 0;
};

struct SvmModel {
  Standardizer standardizer;
  double C = 1.0;
  double gamma = 0.2;
  double weight_spoofed = 1.0;
  double weight_normal = 1.0;
  /// Standardized support vectors and their alpha_i * y_i.
  FeatureMatrix support_vectors;
  std::vector<double> coef;
  double bias = 0.0;
  ModelMetadata meta;
  TrainingDiagnostics diagnostics;

  std::size_t dim() const { return standardizer.dim(); }
};

/// Fits the standardizer on `x`, then solves the dual. Vectors with
/// alpha > 1e-8 are kept. Throws ValidationError for single-class or
/// non-finite input and ConvergenceError when the iteration cap is hit.
SvmModel train_svm(const FeatureMatrix& x, std::span<const int> y, const SvmParams& params = {});

struct Decision {
  Label label = Label::Normal;
  double margin = 0.0;
};

/// margin = sum_i coef_i K(s_i, standardize(x)) + b; margin 0 is Normal.
Decision decide(const SvmModel& model, std::span<const double> x);
/// Margins for every row of raw (unstandardized) features, OpenMP over rows.
std::vector<double> decide_batch(const SvmModel& model, const FeatureMatrix& x, int jobs = 0);
/// Single-threaded reference for decide_batch.
std::vector<double> decide_batch_serial(const SvmModel& model, const FeatureMatrix& x);

inline Label label_of(double margin) { return margin > 0.0 ? Label::Spoofed : Label::Normal; }

/// One dataset variant (e.g. a feature set) for the grid search.
struct GridData {
  std::string feature_set;
  LabeledSet train;
  LabeledSet validate;
};

struct GridCell {
  std::string feature_set;
  double C = 0.0;
  double gamma = 0.0;
  EvalCounts counts;
  double f1 = 0.0;
  /// F1 was undefined (no positives anywhere) and reported as 0.
  bool f1_undefined = false;
  std::size_t support_vectors = 0;
};

struct GridResult {
  std::vector<GridCell> cells;
  std::size_t best = 0;
};

/// Trains one model per (data, C, gamma) cell and scores F1 on the
/// validation split. Cells run in parallel. Throws ValidationError when a
/// minute id appears in both splits.
GridResult grid_search(const std::vector<GridData>& data, std::span<const double> c_grid,
                       std::span<const double> gamma_grid, const SvmParams& base = {}, int jobs = 0);

}  // namespace phasor_sentinel
