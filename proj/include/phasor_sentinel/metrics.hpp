#pragma once

#include <cstdint>

namespace phasor_sentinel {

struct EvalCounts {
  std::int64_t true_pos = 0;
  std::int64_t false_pos = 0;
  std::int64_t false_neg = 0;
  std::int64_t true_neg = 0;

  std::int64_t total() const { return true_pos + false_pos + false_neg + true_neg; }
  EvalCounts& operator+=(const EvalCounts& o) {
    true_pos += o.true_pos;
    false_pos += o.false_pos;
    false_neg += o.false_neg;
    true_neg += o.true_neg;
    return *this;
  }
  friend EvalCounts operator+(EvalCounts a, const EvalCounts& b) { return a += b; }
  friend bool operator==(const EvalCounts&, const EvalCounts&) = default;

  void add(bool predicted_spoofed, bool actually_spoofed) {
    if (actually_spoofed) {
      (predicted_spoofed ? true_pos : false_neg) += 1;
    } else {
      (predicted_spoofed ? false_pos : true_neg) += 1;
    }
  }
};

/// Fractions in [0, 1]; percentages are a presentation concern.
struct Metrics {
  double sensitivity = 0.0;  // TP / (TP + FN)
  double fdr = 0.0;          // FP / (FP + TP)
  double precision = 0.0;    // 1 - FDR
  double f1 = 0.0;           // harmonic mean of sensitivity and precision
  /// Set when a denominator was zero and the affected metric defaulted to 0.
  bool degenerate = false;
};

Metrics metrics(const EvalCounts& counts);

}  // namespace phasor_sentinel
