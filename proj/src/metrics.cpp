#include "phasor_sentinel/metrics.hpp"

namespace phasor_sentinel {

Metrics metrics(const EvalCounts& c) {
  Metrics m;
  const auto tp = static_cast<double>(c.true_pos);
  const auto fp = static_cast<double>(c.false_pos);
  const auto fn = static_cast<double>(c.false_neg);
  if (tp + fn > 0) {
    m.sensitivity = tp / (tp + fn);
  } else {
    m.degenerate = true;
  }
  if (tp + fp > 0) {
    m.fdr = fp / (tp + fp);
    m.precision = tp / (tp + fp);
  } else {
    m.degenerate = true;
  }
  if (m.sensitivity + m.precision > 0) {
    m.f1 = 2.0 * m.sensitivity * m.precision / (m.sensitivity + m.precision);
  }
  return m;
}

}  // namespace phasor_sentinel
