#include "phasor_sentinel/correlation.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "phasor_sentinel/error.hpp"
#include "phasor_sentinel/parallel.hpp"

namespace phasor_sentinel {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// A centered sum of squares is treated as zero when it is below the rounding
// noise of the sums it came from, or when the spread is below 1e-10 of the mean.
bool negligible_spread(double centered_ss, double raw_ss, double mean, double n) {
  if (!(centered_ss > 0.0)) return true;
  if (centered_ss <= 64.0 * kEps * raw_ss) return true;
  const double rel = 1e-10 * std::abs(mean);
  return centered_ss <= n * rel * rel;
}

double clamp_r(double r) { return std::max(-1.0, std::min(1.0, r)); }

}  // namespace

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  if (x.size() < 2) throw ValidationError("pearson: need at least two samples");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (negligible_spread(sxx, 0.0, mx, n) || negligible_spread(syy, 0.0, my, n)) {
    return {0.0, true};
  }
  return {clamp_r(sxy / std::sqrt(sxx * syy)), false};
}

RollingCorrelation::RollingCorrelation(int window, int refresh_interval)
    : window_(window), refresh_interval_(refresh_interval) {
  if (window < 2) throw ValidationError("correlation window must be >= 2");
  if (refresh_interval < 1) throw ValidationError("refresh interval must be >= 1");
  xs_.assign(static_cast<std::size_t>(window), 0.0);
  ys_.assign(static_cast<std::size_t>(window), 0.0);
}

std::optional<double> RollingCorrelation::push(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw ValidationError("non-finite sample pushed into correlation stream");
  }
  if (!have_shift_) {
    shift_x_ = x;
    shift_y_ = y;
    have_shift_ = true;
  }
  const auto slot = static_cast<std::size_t>(head_);
  if (count_ == window_) {
    const double ox = xs_[slot] - shift_x_;
    const double oy = ys_[slot] - shift_y_;
    sx_ -= ox;
    sy_ -= oy;
    sxx_ -= ox * ox;
    syy_ -= oy * oy;
    sxy_ -= ox * oy;
  } else {
    ++count_;
  }
  xs_[slot] = x;
  ys_[slot] = y;
  const double nx = x - shift_x_;
  const double ny = y - shift_y_;
  sx_ += nx;
  sy_ += ny;
  sxx_ += nx * nx;
  syy_ += ny * ny;
  sxy_ += nx * ny;
  head_ = (head_ + 1) % window_;
  ++pushes_;

  if (++since_refresh_ >= refresh_interval_) refresh();
  if (count_ < window_) return std::nullopt;
  return current();
}

void RollingCorrelation::refresh() {
  since_refresh_ = 0;
  const auto n = static_cast<std::size_t>(count_);
  if (n == 0) return;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs_[i];
    my += ys_[i];
  }
  shift_x_ = mx / static_cast<double>(n);
  shift_y_ = my / static_cast<double>(n);
  sx_ = sy_ = sxx_ = syy_ = sxy_ = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs_[i] - shift_x_;
    const double dy = ys_[i] - shift_y_;
    sx_ += dx;
    sy_ += dy;
    sxx_ += dx * dx;
    syy_ += dy * dy;
    sxy_ += dx * dy;
  }
}

double RollingCorrelation::current() {
  const auto n = static_cast<double>(count_);
  const double vx = sxx_ - sx_ * sx_ / n;
  const double vy = syy_ - sy_ * sy_ / n;
  const double mean_x = shift_x_ + sx_ / n;
  const double mean_y = shift_y_ + sy_ / n;
  if (negligible_spread(vx, sxx_, mean_x, n) || negligible_spread(vy, syy_, mean_y, n)) {
    degenerate_ = true;
    return 0.0;
  }
  degenerate_ = false;
  return clamp_r((sxy_ - sx_ * sy_ / n) / std::sqrt(vx * vy));
}

std::vector<double> RollingCorrelation::window_x() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count_));
  const int start = count_ == window_ ? head_ : 0;
  for (int k = 0; k < count_; ++k) out.push_back(xs_[static_cast<std::size_t>((start + k) % window_)]);
  return out;
}

std::vector<double> RollingCorrelation::window_y() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count_));
  const int start = count_ == window_ ? head_ : 0;
  for (int k = 0; k < count_; ++k) out.push_back(ys_[static_cast<std::size_t>((start + k) % window_)]);
  return out;
}

ChannelTable ChannelTable::from_dataset(const MinuteDataset& minute) {
  ChannelTable t;
  t.pmu_count_ = minute.pmu_count();
  if (t.pmu_count_ < 1) throw ValidationError("dataset has no PMU streams");
  t.cycles_ = minute.cycles();
  t.first_cycle_ = t.cycles_ > 0 ? minute.streams.front().front().cycle : 0;
  for (const auto& s : minute.streams) {
    if (static_cast<std::int64_t>(s.size()) != t.cycles_) {
      throw ValidationError("misaligned PMU streams: stream lengths differ");
    }
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k].cycle != t.first_cycle_ + static_cast<std::int64_t>(k)) {
        throw ValidationError("misaligned PMU streams: cycle " + std::to_string(s[k].cycle) +
                              " at position " + std::to_string(k));
      }
    }
  }
  const auto n = static_cast<std::size_t>(t.cycles_);
  t.data_.assign(static_cast<std::size_t>(t.pmu_count_) * kParameterCount * n, 0.0);
  for (int pmu = 0; pmu < t.pmu_count_; ++pmu) {
    const auto& stream = minute.streams[static_cast<std::size_t>(pmu)];
    double* base = t.data_.data() + static_cast<std::size_t>(pmu) * kParameterCount * n;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& f = stream[k];
      const auto seq = fortescue(f.va, f.vb, f.vc);
      for (Parameter p : kAllParameters) {
        base[static_cast<std::size_t>(index_of(p)) * n + k] = extract_channel(f, seq, p);
      }
    }
    for (Parameter p : kAllParameters) {
      if (is_angle(p)) unwrap_in_place(std::span<double>(base + static_cast<std::size_t>(index_of(p)) * n, n));
    }
  }
  return t;
}

std::span<const double> ChannelTable::series(int pmu, Parameter p) const {
  const auto n = static_cast<std::size_t>(cycles_);
  const auto offset = (static_cast<std::size_t>(pmu) * kParameterCount + static_cast<std::size_t>(index_of(p))) * n;
  return {data_.data() + offset, n};
}

int pair_index(int i, int j, int pmu_count) {
  // Pairs before row i: sum_{k<i} (P-1-k).
  return i * (2 * pmu_count - i - 1) / 2 + (j - i - 1);
}

std::vector<std::pair<int, int>> all_pairs(int pmu_count) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < pmu_count; ++i) {
    for (int j = i + 1; j < pmu_count; ++j) out.emplace_back(i, j);
  }
  return out;
}

void validate_window(int window) {
  if (window < 2) throw ValidationError("correlation window must be >= 2");
}

namespace {

FeatureTable empty_table(const ChannelTable& table, int window, std::span<const Parameter> channels) {
  validate_window(window);
  FeatureTable out;
  out.window = window;
  out.pmu_count = table.pmu_count();
  out.channels.assign(channels.begin(), channels.end());
  const std::int64_t cycles = table.cycles() - window + 1;
  if (cycles <= 0) return out;
  const auto pairs = all_pairs(table.pmu_count());
  out.rows.resize(static_cast<std::size_t>(cycles) * pairs.size());
  for (std::int64_t c = 0; c < cycles; ++c) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      auto& row = out.rows[static_cast<std::size_t>(c) * pairs.size() + p];
      row.cycle = table.first_cycle() + c + window - 1;
      row.pmu_i = pairs[p].first;
      row.pmu_j = pairs[p].second;
    }
  }
  return out;
}

void correlate_pair(const ChannelTable& table, FeatureTable& out, int pair, int i, int j) {
  const auto npairs = static_cast<std::size_t>(out.pair_count());
  const int window = out.window;
  for (Parameter p : out.channels) {
    const auto x = table.series(i, p);
    const auto y = table.series(j, p);
    const auto ch = static_cast<std::size_t>(index_of(p));
    const auto bit = static_cast<std::uint8_t>(1u << ch);
    RollingCorrelation rc(window);
    for (std::size_t t = 0; t < x.size(); ++t) {
      const auto r = rc.push(x[t], y[t]);
      if (!r) continue;
      auto& row = out.rows[(t + 1 - static_cast<std::size_t>(window)) * npairs + static_cast<std::size_t>(pair)];
      row.r[ch] = *r;
      if (rc.degenerate()) row.degenerate_mask |= bit;
    }
  }
}

}  // namespace

FeatureTable correlate_fleet(const ChannelTable& table, int window, std::span<const Parameter> channels,
                             int jobs) {
  auto out = empty_table(table, window, channels);
  if (out.rows.empty()) return out;
  const auto pairs = all_pairs(table.pmu_count());
  parallel_for(
      static_cast<std::int64_t>(pairs.size()),
      [&](std::int64_t p) {
        const auto& [i, j] = pairs[static_cast<std::size_t>(p)];
        correlate_pair(table, out, static_cast<int>(p), i, j);
      },
      jobs);
  return out;
}

FeatureTable correlate_fleet(const MinuteDataset& minute, int window, std::span<const Parameter> channels,
                             int jobs) {
  return correlate_fleet(ChannelTable::from_dataset(minute), window, channels, jobs);
}

FeatureTable correlate_fleet_serial(const ChannelTable& table, int window,
                                    std::span<const Parameter> channels) {
  auto out = empty_table(table, window, channels);
  if (out.rows.empty()) return out;
  const auto pairs = all_pairs(table.pmu_count());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    correlate_pair(table, out, static_cast<int>(p), pairs[p].first, pairs[p].second);
  }
  return out;
}

FeatureTable correlate_fleet_batch(const ChannelTable& table, int window,
                                   std::span<const Parameter> channels) {
  auto out = empty_table(table, window, channels);
  const auto w = static_cast<std::size_t>(window);
  for (auto& row : out.rows) {
    const auto end = static_cast<std::size_t>(row.cycle - table.first_cycle()) + 1;
    for (Parameter p : out.channels) {
      const auto x = table.series(row.pmu_i, p).subspan(end - w, w);
      const auto y = table.series(row.pmu_j, p).subspan(end - w, w);
      const auto res = pearson(x, y);
      const auto ch = static_cast<std::size_t>(index_of(p));
      row.r[ch] = res.r;
      if (res.degenerate) row.degenerate_mask |= static_cast<std::uint8_t>(1u << ch);
    }
  }
  return out;
}

const MeanStd& IntraPmuStats::at(Parameter a, Parameter b) const {
  if (index_of(a) > index_of(b)) std::swap(a, b);
  return cells[static_cast<std::size_t>(index_of(a))][static_cast<std::size_t>(index_of(b))];
}

IntraPmuStats intra_pmu_stats(const ChannelTable& table, int pmu, int window) {
  validate_window(window);
  if (pmu < 0 || pmu >= table.pmu_count()) throw ValidationError("intra_pmu_stats: PMU out of range");
  if (table.cycles() < kCyclesPerMinute) {
    throw ValidationError("intra_pmu_stats needs at least 60 seconds of data");
  }
  IntraPmuStats out;
  out.window = window;
  out.window_count = table.cycles() - window + 1;
  for (int a = 0; a < kParameterCount; ++a) {
    for (int b = a + 1; b < kParameterCount; ++b) {
      const auto x = table.series(pmu, static_cast<Parameter>(a));
      const auto y = table.series(pmu, static_cast<Parameter>(b));
      RollingCorrelation rc(window);
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t t = 0; t < x.size(); ++t) {
        if (const auto r = rc.push(x[t], y[t])) {
          sum += *r;
          sum_sq += *r * *r;
        }
      }
      const auto n = static_cast<double>(out.window_count);
      const double mean = sum / n;
      auto& cell = out.cells[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      cell.mean = mean;
      cell.std = std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
    }
  }
  return out;
}

}  // namespace phasor_sentinel
