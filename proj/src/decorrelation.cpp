#include "phasor_sentinel/decorrelation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phasor_sentinel/error.hpp"

namespace phasor_sentinel {

namespace {

void expect_aligned(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("trajectory length mismatch");
}

}  // namespace

double mcd(std::span<const double> nspf, std::span<const double> spf) {
  expect_aligned(nspf, spf);
  double best = 0.0;
  for (std::size_t t = 0; t < nspf.size(); ++t) best = std::max(best, std::abs(nspf[t] - spf[t]));
  return best;
}

std::int64_t mcoob(std::span<const double> nspf, std::span<const double> spf, double band) {
  expect_aligned(nspf, spf);
  std::int64_t count = 0;
  for (std::size_t t = 0; t < nspf.size(); ++t) {
    if (std::abs(spf[t] - nspf[t]) > band * std::abs(nspf[t])) ++count;
  }
  return count;
}

std::vector<double> pointwise_median(const std::vector<std::vector<double>>& series) {
  if (series.empty()) throw ValidationError("median of an empty group");
  const std::size_t n = series.front().size();
  for (const auto& s : series) {
    if (s.size() != n) throw ValidationError("trajectory length mismatch");
  }
  std::vector<double> out(n), column(series.size());
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < series.size(); ++k) column[k] = series[k][t];
    const auto mid = column.size() / 2;
    std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid), column.end());
    double m = column[mid];
    if (column.size() % 2 == 0) {
      m = 0.5 * (m + *std::max_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid)));
    }
    out[t] = m;
  }
  return out;
}

TrajectoryBundle extract_trajectories(const FeatureTable& table, Parameter channel, int target_pmu,
                                      std::int64_t from_cycle) {
  TrajectoryBundle b;
  b.channel = channel;
  b.window = table.window;
  const auto cycles = table.cycle_count();
  const int npairs = table.pair_count();
  if (cycles == 0) return b;
  const std::int64_t first = table.rows.front().cycle;
  const std::int64_t offset = std::clamp<std::int64_t>(from_cycle - first, 0, cycles);
  b.first_cycle = first + offset;
  const auto ch = static_cast<std::size_t>(index_of(channel));
  for (int p = 0; p < npairs; ++p) {
    std::vector<double> traj;
    traj.reserve(static_cast<std::size_t>(cycles - offset));
    for (std::int64_t c = offset; c < cycles; ++c) traj.push_back(table.at(c, p).r[ch]);
    const auto& row0 = table.at(0, p);
    if (row0.pmu_i == target_pmu || row0.pmu_j == target_pmu) {
      b.spoofed.push_back(std::move(traj));
    } else {
      b.nonspoofed.push_back(std::move(traj));
    }
  }
  return b;
}

double SeverityRow::mean_mcd() const {
  return mcd.empty() ? 0.0 : std::accumulate(mcd.begin(), mcd.end(), 0.0) / static_cast<double>(mcd.size());
}

double SeverityRow::mean_mcoob() const {
  if (mcoob.empty()) return 0.0;
  return static_cast<double>(std::accumulate(mcoob.begin(), mcoob.end(), std::int64_t{0})) /
         static_cast<double>(mcoob.size());
}

std::pair<SeverityRow, SeverityRow> severity(const TrajectoryBundle& bundle, double band) {
  if (bundle.spoofed.empty() || bundle.nonspoofed.empty()) {
    throw ValidationError("severity needs non-empty spoofed and non-spoofed groups");
  }
  const auto reference = pointwise_median(bundle.nonspoofed);
  SeverityRow spf{bundle.channel, bundle.window, true, {}, {}};
  SeverityRow nspf{bundle.channel, bundle.window, false, {}, {}};
  for (const auto& s : bundle.spoofed) {
    spf.mcd.push_back(mcd(reference, s));
    spf.mcoob.push_back(mcoob(reference, s, band));
  }
  for (const auto& s : bundle.nonspoofed) {
    nspf.mcd.push_back(mcd(reference, s));
    nspf.mcoob.push_back(mcoob(reference, s, band));
  }
  return {std::move(spf), std::move(nspf)};
}

const std::vector<Parameter>& severity_channels() {
  static const std::vector<Parameter> channels = {Parameter::Freq, Parameter::VPosMag, Parameter::VPosAng,
                                                  Parameter::VNegAng, Parameter::VZeroAng};
  return channels;
}

std::vector<SeverityRow> severity_report(std::span<const TrajectoryBundle> bundles, double band) {
  std::vector<SeverityRow> rows;
  rows.reserve(bundles.size() * 2);
  for (const auto& b : bundles) {
    auto [spf, nspf] = severity(b, band);
    rows.push_back(std::move(spf));
    rows.push_back(std::move(nspf));
  }
  return rows;
}

}  // namespace phasor_sentinel
