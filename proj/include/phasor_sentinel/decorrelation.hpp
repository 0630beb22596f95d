#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "phasor_sentinel/correlation.hpp"
#include "phasor_sentinel/phasor.hpp"

namespace phasor_sentinel {

/// Maximum correlation deviation: max_t |nspf_t - spf_t|.
double mcd(std::span<const double> nspf, std::span<const double> spf);

/// Cycles during which spf leaves the +-band envelope around nspf, i.e.
/// |spf_t - nspf_t| > band * |nspf_t|.
std::int64_t mcoob(std::span<const double> nspf, std::span<const double> spf, double band = 0.10);

/// Pointwise median across equally long series.
std::vector<double> pointwise_median(const std::vector<std::vector<double>>& series);

/// Correlation trajectories of one channel at one window size, split by
/// whether the pair involves the spoofed PMU.
struct TrajectoryBundle {
  Parameter channel = Parameter::Freq;
  int window = 0;
  std::int64_t first_cycle = 0;
  std::vector<std::vector<double>> spoofed;
  std::vector<std::vector<double>> nonspoofed;
};

/// Trajectories from `from_cycle` (inclusive) to the end of the table.
TrajectoryBundle extract_trajectories(const FeatureTable& table, Parameter channel, int target_pmu,
                                      std::int64_t from_cycle);

struct SeverityRow {
  Parameter channel = Parameter::Freq;
  int window = 0;
  bool spoofed = false;
  /// One entry per pair in the group.
  std::vector<double> mcd;
  std::vector<std::int64_t> mcoob;

  double mean_mcd() const;
  double mean_mcoob() const;
};

/// MCD/MCOOB of each trajectory against the non-spoofed group's pointwise
/// median. Throws ValidationError when a group is empty or lengths differ.
std::pair<SeverityRow, SeverityRow> severity(const TrajectoryBundle& bundle, double band = 0.10);

/// Channels shown in the severity report: f, |V+|, phi+, phi-, phi0.
const std::vector<Parameter>& severity_channels();

/// One spoofed/non-spoofed row pair per (channel, window) bundle, in the
/// order given; the report for the five-channel, four-window grid has 40 rows.
std::vector<SeverityRow> severity_report(std::span<const TrajectoryBundle> bundles, double band = 0.10);

}  // namespace phasor_sentinel
