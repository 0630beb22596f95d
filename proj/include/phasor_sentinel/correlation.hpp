#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "phasor_sentinel/fleet.hpp"
#include "phasor_sentinel/phasor.hpp"

namespace phasor_sentinel {

/// Correlation windows examined for the fleet: 1, 2, 5 and 10 seconds.
inline constexpr std::array<int, 4> kStandardWindows = {60, 120, 300, 600};

struct PearsonResult {
  double r = 0.0;
  /// Either series had (numerically) zero variance; r is reported as 0.
  bool degenerate = false;
};

/// Sample Pearson correlation, two-pass. Throws ValidationError when the
/// lengths differ or fewer than two samples are given.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

/// Sliding-window correlation of two streams with O(1) updates.
///
/// Running sums are kept about a shift point (the buffer mean at the last
/// refresh) and recomputed from the ring buffer every `refresh_interval`
/// pushes, which keeps them within ~1e-12 relative of a batch evaluation.
class RollingCorrelation {
 public:
  static constexpr int kDefaultRefresh = 4096;

  explicit RollingCorrelation(int window, int refresh_interval = kDefaultRefresh);

  /// Appends a sample pair, evicting the oldest once the window is full.
  /// Returns the window correlation once `window` samples have been seen.
  /// Throws ValidationError on non-finite input.
  std::optional<double> push(double x, double y);

  /// Whether the most recent returned value came from a zero-variance window.
  bool degenerate() const { return degenerate_; }
  int window() const { return window_; }
  bool primed() const { return count_ == window_; }
  std::int64_t pushes() const { return pushes_; }

  /// Buffer contents, oldest first.
  std::vector<double> window_x() const;
  std::vector<double> window_y() const;

 private:
  void refresh();
  double current();

  int window_;
  int refresh_interval_;
  std::vector<double> xs_, ys_;
  int head_ = 0;
  int count_ = 0;
  std::int64_t pushes_ = 0;
  int since_refresh_ = 0;
  bool have_shift_ = false;
  double shift_x_ = 0.0, shift_y_ = 0.0;
  double sx_ = 0.0, sy_ = 0.0, sxx_ = 0.0, syy_ = 0.0, sxy_ = 0.0;
  bool degenerate_ = false;
};

/// Analysis channels of one minute: sequence components derived from the
/// phase voltages, phase angles unwrapped per PMU.
class ChannelTable {
 public:
  /// Throws ValidationError if PMU streams are not aligned on cycle index.
  static ChannelTable from_dataset(const MinuteDataset& minute);

  int pmu_count() const { return pmu_count_; }
  std::int64_t cycles() const { return cycles_; }
  std::int64_t first_cycle() const { return first_cycle_; }
  std::span<const double> series(int pmu, Parameter p) const;

 private:
  int pmu_count_ = 0;
  std::int64_t cycles_ = 0;
  std::int64_t first_cycle_ = 0;
  std::vector<double> data_;  // [pmu][parameter][cycle]
};

struct FeatureRow {
  std::int64_t cycle = 0;
  int pmu_i = 0;
  int pmu_j = 0;
  /// Indexed by index_of(Parameter); channels not requested stay 0.
  std::array<double, kParameterCount> r{};
  /// Bit index_of(p) set when channel p's window had zero variance.
  std::uint8_t degenerate_mask = 0;
};

/// Rows for every primed cycle and every pair i < j, cycle-major, pairs in
/// lexicographic order.
struct FeatureTable {
  int window = 0;
  int pmu_count = 0;
  std::vector<Parameter> channels;
  std::vector<FeatureRow> rows;

  int pair_count() const { return pmu_count * (pmu_count - 1) / 2; }
  std::int64_t cycle_count() const {
    return pair_count() == 0 ? 0 : static_cast<std::int64_t>(rows.size()) / pair_count();
  }
  const FeatureRow& at(std::int64_t cycle_offset, int pair) const {
    return rows[static_cast<std::size_t>(cycle_offset * pair_count() + pair)];
  }
};

/// Index of pair (i, j), i < j, in lexicographic order.
int pair_index(int i, int j, int pmu_count);
std::vector<std::pair<int, int>> all_pairs(int pmu_count);

void validate_window(int window);

/// Streaming fleet correlator; pairs are sharded across OpenMP workers.
FeatureTable correlate_fleet(const ChannelTable& table, int window, std::span<const Parameter> channels,
                             int jobs = 0);
FeatureTable correlate_fleet(const MinuteDataset& minute, int window, std::span<const Parameter> channels,
                             int jobs = 0);
/// Same streaming kernel on one thread.
FeatureTable correlate_fleet_serial(const ChannelTable& table, int window, std::span<const Parameter> channels);
/// Reference: two-pass Pearson recomputed over every window. O(W) per row.
FeatureTable correlate_fleet_batch(const ChannelTable& table, int window, std::span<const Parameter> channels);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Sliding-window correlation between every pair of one PMU's channels,
/// summarized by mean and (population) standard deviation over all windows.
struct IntraPmuStats {
  int window = 0;
  std::int64_t window_count = 0;
  /// cells[a][b] is populated for a < b (parameter order).
  std::array<std::array<MeanStd, kParameterCount>, kParameterCount> cells{};
  const MeanStd& at(Parameter a, Parameter b) const;
};

/// Requires at least one minute of data.
IntraPmuStats intra_pmu_stats(const ChannelTable& table, int pmu, int window = 60);

}  // namespace phasor_sentinel
