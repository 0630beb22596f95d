#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phasor_sentinel/correlation.hpp"
#include "phasor_sentinel/metrics.hpp"
#include "phasor_sentinel/spoof.hpp"
#include "phasor_sentinel/svm.hpp"

namespace phasor_sentinel {

/// Three = {r(|V+|), r(phi+), r(f)}; Five adds {r(phi-), r(phi0)}.
enum class FeatureSetId { Three, Five };

const std::vector<Parameter>& feature_channels(FeatureSetId id);
std::string to_string(FeatureSetId id);
/// Accepts "three"/"3" and "five"/"5".
FeatureSetId parse_feature_set(const std::string& text);

/// Early: a window is Spoofed once it holds any spoofed cycle.
/// Late: only when more than half of it is spoofed.
enum class TimingRule { Early, Late };

std::string to_string(TimingRule rule);
TimingRule parse_timing(const std::string& text);

bool window_label(TimingRule rule, int spoofed_cycles, int window);

struct ExampleOptions {
  FeatureSetId features = FeatureSetId::Five;
  int window = 300;
  TimingRule timing = TimingRule::Late;
  /// Keep every stride-th primed cycle (1 keeps all).
  int stride = 1;
};

/// One example per kept cycle and pair i < j. A pair's window label counts
/// cycles at which either endpoint is spoofed. Throws ValidationError when
/// the table's window differs from `options.window` or a feature channel is
/// missing.
LabeledSet build_examples(const SpoofedMinute& minute, const FeatureTable& table, const ExampleOptions& options);
/// Computes the feature table first.
LabeledSet build_examples(const SpoofedMinute& minute, const ExampleOptions& options, int jobs = 0);

/// Consecutive Spoofed predictions that count as a detection.
inline constexpr int kDetectionRun = 30;

/// predictions[k] is the verdict k cycles after spoof onset. Returns the
/// number of cycles from onset until the first run of kDetectionRun
/// Spoofed verdicts completes (so immediate detection gives 30).
std::optional<std::int64_t> latency(std::span<const std::uint8_t> predictions);

struct SpoofedPair {
  int minute = 0;
  int pmu_i = 0;
  int pmu_j = 0;
  std::optional<std::int64_t> latency;
};

struct LatencySummary {
  std::int64_t pairs = 0;
  std::int64_t detected = 0;
  std::int64_t min = 0;
  std::int64_t max = 0;
  double mean = 0.0;
  bool all_detected() const { return pairs > 0 && detected == pairs; }
};

LatencySummary summarize(std::span<const SpoofedPair> pairs);

struct DetectionReport {
  std::string spoof;
  EvalCounts counts;
  Metrics metrics;
  std::vector<SpoofedPair> pairs;
  LatencySummary latency;
};

/// Early-labelled, unstrided test examples with the onset information
/// needed for latency.
struct EvalSet {
  std::string spoof;
  FeatureSetId features = FeatureSetId::Five;
  int window = 300;
  LabeledSet examples;
  struct Onset {
    int minute = 0;
    int target_pmu = 0;
    std::int64_t start_cycle = 0;
  };
  std::vector<Onset> onsets;
};

EvalSet build_eval_set(std::span<const SpoofedMinute> minutes, FeatureSetId features, int window = 300,
                       int jobs = 0);

/// Scores per-example verdicts (nonzero = Spoofed) against an EvalSet.
DetectionReport score(const EvalSet& set, std::span<const std::uint8_t> predicted);

/// Throws ValidationError when the model's training minutes overlap the
/// test minutes or its feature set/window differ from the set's.
DetectionReport evaluate_spoof_specific(const SvmModel& model, const EvalSet& set, int jobs = 0);

/// Spoofed iff at least `threshold` models vote Spoofed.
Label ensemble_vote(std::span<const SvmModel> models, std::span<const double> x, int threshold);

struct EnsembleRow {
  int threshold = 0;
  EvalCounts counts;
  Metrics metrics;
  /// One report per held-out spoof, in suite order.
  std::vector<DetectionReport> held_out;
};

struct EnsembleTable {
  std::vector<std::string> spoofs;
  std::vector<EnsembleRow> rows;
};

/// Leave-one-out: each spoof's test set is classified by the other models.
/// models[k] and sets[k] must refer to the same spoof. Thresholds run
/// 1..models.size()-1.
EnsembleTable evaluate_ensemble_loo(std::span<const SvmModel> models, std::span<const EvalSet> sets, int jobs = 0);

/// Latency summary pooled over the held-out reports whose spoof code starts
/// with `prefix` ("S1", "S2", "S3").
LatencySummary pooled_latency(const EnsembleRow& row, const std::string& prefix);

}  // namespace phasor_sentinel
