#include "phasor_sentinel/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "phasor_sentinel/io.hpp"

namespace phasor_sentinel {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string percent(double fraction) { return fixed(100.0 * fraction, 2) + "%"; }

std::string range(const LatencySummary& s) {
  if (s.detected == 0) return "not detected";
  std::string out = "[" + std::to_string(s.min) + ", " + std::to_string(s.max) + "]";
  if (s.detected < s.pairs) out += " (" + std::to_string(s.pairs - s.detected) + " missed)";
  return out;
}

std::string pad(const std::string& s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

std::string header(std::string_view kind) { return "# schema=" + schema_tag(kind) + "\n"; }

}  // namespace

std::int64_t latency_percentile(std::span<const SpoofedPair> pairs, double q) {
  std::vector<std::int64_t> v;
  for (const auto& p : pairs) {
    if (p.latency) v.push_back(*p.latency);
  }
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  rank = std::clamp<std::size_t>(rank, 1, v.size());
  return v[rank - 1];
}

std::string spoof_specific_csv(std::span<const DetectionReport> reports) {
  std::ostringstream out;
  out << header("report.spoof-specific")
      << "spoof,true_pos,false_pos,false_neg,true_neg,sensitivity,fdr,f1,latency_min,latency_p50,latency_p90,"
         "latency_max,latency_mean,not_detected\n";
  for (const auto& r : reports) {
    out << r.spoof << ',' << r.counts.true_pos << ',' << r.counts.false_pos << ',' << r.counts.false_neg << ','
        << r.counts.true_neg << ',' << fixed(r.metrics.sensitivity, 6) << ',' << fixed(r.metrics.fdr, 6) << ','
        << fixed(r.metrics.f1, 6) << ',' << r.latency.min << ',' << latency_percentile(r.pairs, 0.5) << ','
        << latency_percentile(r.pairs, 0.9) << ',' << r.latency.max << ',' << fixed(r.latency.mean, 2) << ','
        << r.latency.pairs - r.latency.detected << '\n';
  }
  return out.str();
}

std::string spoof_specific_text(std::span<const DetectionReport> reports) {
  std::ostringstream out;
  out << pad("Spoof", 8, true) << pad("True+", 9) << pad("False+", 9) << pad("False-", 9) << pad("Latency", 24)
      << pad("Sensitivity", 13) << pad("FDR", 9) << pad("F1", 8) << '\n';
  for (const auto& r : reports) {
    out << pad(r.spoof, 8, true) << pad(std::to_string(r.counts.true_pos), 9)
        << pad(std::to_string(r.counts.false_pos), 9) << pad(std::to_string(r.counts.false_neg), 9)
        << pad(range(r.latency), 24) << pad(percent(r.metrics.sensitivity), 13) << pad(percent(r.metrics.fdr), 9)
        << pad(fixed(r.metrics.f1, 3), 8) << '\n';
  }
  return out.str();
}

std::string latency_csv(std::span<const DetectionReport> reports) {
  std::ostringstream out;
  out << header("report.latency") << "spoof,minute,pmu_i,pmu_j,latency_cycles\n";
  for (const auto& r : reports) {
    for (const auto& p : r.pairs) {
      out << r.spoof << ',' << p.minute << ',' << p.pmu_i << ',' << p.pmu_j << ','
          << (p.latency ? std::to_string(*p.latency) : "not_detected") << '\n';
    }
  }
  return out.str();
}

std::string ensemble_csv(const EnsembleTable& table) {
  std::ostringstream out;
  out << header("report.ensemble")
      << "threshold,true_pos,false_pos,false_neg,true_neg,sensitivity,fdr,f1,s1_min,s1_max,s2_min,s2_max,s3_min,"
         "s3_max,s3_mean,not_detected\n";
  for (const auto& row : table.rows) {
    const auto s1 = pooled_latency(row, "S1");
    const auto s2 = pooled_latency(row, "S2");
    const auto s3 = pooled_latency(row, "S3");
    std::int64_t missed = 0;
    for (const auto& r : row.held_out) missed += r.latency.pairs - r.latency.detected;
    out << row.threshold << ',' << row.counts.true_pos << ',' << row.counts.false_pos << ','
        << row.counts.false_neg << ',' << row.counts.true_neg << ',' << fixed(row.metrics.sensitivity, 6) << ','
        << fixed(row.metrics.fdr, 6) << ',' << fixed(row.metrics.f1, 6) << ',' << s1.min << ',' << s1.max << ','
        << s2.min << ',' << s2.max << ',' << s3.min << ',' << s3.max << ',' << fixed(s3.mean, 2) << ',' << missed
        << '\n';
  }
  return out.str();
}

std::string ensemble_text(const EnsembleTable& table) {
  std::ostringstream out;
  out << pad("T", 3) << pad("Sensitivity", 13) << pad("FDR", 9) << pad("F1", 8) << pad("S1L", 14) << pad("S2L", 14)
      << pad("S3L", 22) << '\n';
  for (const auto& row : table.rows) {
    const auto s3 = pooled_latency(row, "S3");
    std::string s3_text = range(s3);
    if (s3.detected > 0) s3_text += " " + fixed(s3.mean, 0);
    out << pad(std::to_string(row.threshold), 3) << pad(percent(row.metrics.sensitivity), 13)
        << pad(percent(row.metrics.fdr), 9) << pad(fixed(row.metrics.f1, 3), 8)
        << pad(range(pooled_latency(row, "S1")), 14) << pad(range(pooled_latency(row, "S2")), 14)
        << pad(s3_text, 22) << '\n';
  }
  return out.str();
}

std::string severity_csv(std::span<const SeverityRow> rows) {
  std::ostringstream out;
  out << header("report.severity") << "channel,window,group,pairs,mean_mcd,min_mcd,max_mcd,mean_mcoob\n";
  for (const auto& r : rows) {
    const auto [lo, hi] = std::minmax_element(r.mcd.begin(), r.mcd.end());
    out << parameter_name(r.channel) << ',' << r.window << ',' << (r.spoofed ? "spoofed" : "normal") << ','
        << r.mcd.size() << ',' << fixed(r.mean_mcd(), 6) << ',' << fixed(r.mcd.empty() ? 0.0 : *lo, 6) << ','
        << fixed(r.mcd.empty() ? 0.0 : *hi, 6) << ',' << fixed(r.mean_mcoob(), 2) << '\n';
  }
  return out.str();
}

std::string grid_csv(const GridResult& grid) {
  std::ostringstream out;
  out << header("report.grid") << "features,C,gamma,true_pos,false_pos,false_neg,true_neg,f1,f1_undefined,"
                                  "support_vectors,best\n";
  for (std::size_t k = 0; k < grid.cells.size(); ++k) {
    const auto& c = grid.cells[k];
    out << c.feature_set << ',' << format_double(c.C) << ',' << format_double(c.gamma) << ',' << c.counts.true_pos
        << ',' << c.counts.false_pos << ',' << c.counts.false_neg << ',' << c.counts.true_neg << ','
        << fixed(c.f1, 6) << ',' << (c.f1_undefined ? "true" : "false") << ',' << c.support_vectors << ','
        << (k == grid.best ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace phasor_sentinel
