#include "phasor_sentinel/stream.hpp"

#include <string>

#include "phasor_sentinel/detection.hpp"

namespace phasor_sentinel {

StreamingDetector::StreamingDetector(std::vector<SvmModel> models, int threshold, int pmu_count)
    : models_(std::move(models)), threshold_(threshold), pmu_count_(pmu_count) {
  if (models_.empty()) throw ValidationError("streaming detector needs at least one model");
  if (pmu_count_ < 2) throw ValidationError("streaming detector needs at least 2 PMUs");
  if (threshold_ < 1 || threshold_ > static_cast<int>(models_.size())) {
    throw ValidationError("threshold must lie in [1, " + std::to_string(models_.size()) + "]");
  }
  const auto& first = models_.front().meta;
  for (const auto& m : models_) {
    if (m.meta.feature_set != first.feature_set || m.meta.window != first.window) {
      throw ValidationError("streaming models disagree on feature set or window");
    }
  }
  window_ = first.window;
  validate_window(window_);
  channels_ = feature_channels(parse_feature_set(first.feature_set));
  pairs_ = all_pairs(pmu_count_);
  unwrap_.assign(static_cast<std::size_t>(pmu_count_), std::vector<AngleUnwrapper>(channels_.size()));
  current_.assign(static_cast<std::size_t>(pmu_count_), std::vector<double>(channels_.size()));
  arrived_.assign(static_cast<std::size_t>(pmu_count_), false);
  rolling_.assign(pairs_.size(), std::vector<RollingCorrelation>(channels_.size(), RollingCorrelation(window_)));
}

std::optional<CycleVerdict> StreamingDetector::push(const PhasorFrame& f) {
  if (f.pmu_id < 0 || f.pmu_id >= pmu_count_) throw ValidationError("PMU id " + std::to_string(f.pmu_id) + " out of range");
  if (!cycle_) cycle_ = f.cycle;
  if (f.cycle != *cycle_) {
    throw ValidationError("frame for cycle " + std::to_string(f.cycle) + " arrived while cycle " +
                          std::to_string(*cycle_) + " is incomplete");
  }
  const auto pmu = static_cast<std::size_t>(f.pmu_id);
  if (arrived_[pmu]) throw ValidationError("duplicate frame for PMU " + std::to_string(f.pmu_id));
  arrived_[pmu] = true;
  ++arrived_count_;
  const auto seq = fortescue(f.va, f.vb, f.vc);
  for (std::size_t k = 0; k < channels_.size(); ++k) {
    const double v = extract_channel(f, seq, channels_[k]);
    current_[pmu][k] = is_angle(channels_[k]) ? unwrap_[pmu][k].push(v) : v;
  }
  if (arrived_count_ < pmu_count_) return std::nullopt;

  auto verdict = score_cycle();
  arrived_.assign(arrived_.size(), false);
  arrived_count_ = 0;
  cycle_ = *cycle_ + 1;
  if (verdict.pairs.empty()) return std::nullopt;
  return verdict;
}

CycleVerdict StreamingDetector::score_cycle() {
  CycleVerdict out;
  out.cycle = *cycle_;
  std::vector<double> x(channels_.size());
  std::vector<int> implicated(static_cast<std::size_t>(pmu_count_), 0);
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const auto [i, j] = pairs_[p];
    bool primed = true;
    for (std::size_t k = 0; k < channels_.size(); ++k) {
      const auto r = rolling_[p][k].push(current_[static_cast<std::size_t>(i)][k], current_[static_cast<std::size_t>(j)][k]);
      if (!r) {
        primed = false;
      } else {
        x[k] = *r;
      }
    }
    if (!primed) continue;
    PairVerdict v{i, j, 0, false};
    for (const auto& m : models_) v.votes += decide(m, x).label == Label::Spoofed ? 1 : 0;
    v.spoofed = v.votes >= threshold_;
    if (v.spoofed) {
      out.spoofed = true;
      ++implicated[static_cast<std::size_t>(i)];
      ++implicated[static_cast<std::size_t>(j)];
    }
    out.pairs.push_back(v);
  }
  int best = 0;
  for (int p = 0; p < pmu_count_; ++p) {
    if (implicated[static_cast<std::size_t>(p)] > best) {
      best = implicated[static_cast<std::size_t>(p)];
      out.suspect_pmu = p;
    }
  }
  return out;
}

}  // namespace phasor_sentinel
