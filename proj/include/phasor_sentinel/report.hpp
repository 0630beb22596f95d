#pragma once

#include <span>
#include <string>

#include "phasor_sentinel/decorrelation.hpp"
#include "phasor_sentinel/detection.hpp"

namespace phasor_sentinel {

/// Nearest-rank percentile of the detected latencies; 0 when none.
std::int64_t latency_percentile(std::span<const SpoofedPair> pairs, double q);

// Spoof-specific results: counts, metrics and latency quantiles.
std::string spoof_specific_csv(std::span<const DetectionReport> reports);
/// Columns: spoof, TP, FP, FN, latency range, sensitivity, FDR, F1.
std::string spoof_specific_text(std::span<const DetectionReport> reports);

/// One row per (spoof, minute, pair) that involves the spoofed PMU.
std::string latency_csv(std::span<const DetectionReport> reports);

std::string ensemble_csv(const EnsembleTable& table);
/// Columns: T, sensitivity, FDR, F1, S1 latency, S2 latency, pooled S3
/// latency range followed by its mean.
std::string ensemble_text(const EnsembleTable& table);

std::string severity_csv(std::span<const SeverityRow> rows);

std::string grid_csv(const GridResult& grid);

}  // namespace phasor_sentinel
