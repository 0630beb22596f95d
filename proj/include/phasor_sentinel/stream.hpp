#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "phasor_sentinel/correlation.hpp"
#include "phasor_sentinel/svm.hpp"

namespace phasor_sentinel {

struct PairVerdict {
  int pmu_i = 0;
  int pmu_j = 0;
  int votes = 0;
  bool spoofed = false;
};

struct CycleVerdict {
  std::int64_t cycle = 0;
  std::vector<PairVerdict> pairs;
  bool spoofed = false;
  /// PMU that appears in the most Spoofed pairs, -1 if none.
  int suspect_pmu = -1;
};

/// Online ensemble detector over a live frame stream. Frames arrive
/// cycle-major; a cycle is scored as soon as every PMU has reported it, so
/// the only delay is the correlation window itself.
class StreamingDetector {
 public:
  /// All models must share one feature set and window.
  StreamingDetector(std::vector<SvmModel> models, int threshold, int pmu_count);

  /// Returns the verdict of the cycle this frame completes, if any.
  /// Throws ValidationError on out-of-order or duplicate frames.
  std::optional<CycleVerdict> push(const PhasorFrame& frame);

  int window() const { return window_; }
  const std::vector<Parameter>& channels() const { return channels_; }

 private:
  CycleVerdict score_cycle();

  std::vector<SvmModel> models_;
  int threshold_;
  int pmu_count_;
  int window_;
  std::vector<Parameter> channels_;
  std::vector<std::pair<int, int>> pairs_;
  // Per PMU: unwrappers per channel and the latest channel values.
  std::vector<std::vector<AngleUnwrapper>> unwrap_;
  std::vector<std::vector<double>> current_;
  std::vector<bool> arrived_;
  int arrived_count_ = 0;
  std::optional<std::int64_t> cycle_;
  // [pair][channel]
  std::vector<std::vector<RollingCorrelation>> rolling_;
};

}  // namespace phasor_sentinel
