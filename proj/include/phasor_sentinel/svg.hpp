#pragma once

#include <span>
#include <string>

#include "phasor_sentinel/decorrelation.hpp"

namespace phasor_sentinel {

/// Correlation-vs-cycle plot: one <polyline class="spoofed"> per spoofed
/// pair and one <polyline class="normal"> per other pair.
std::string trajectory_svg(const TrajectoryBundle& bundle, const std::string& title);

/// Severity strips: one row per (channel, window), spoofed and non-spoofed
/// mean MCD and MCOOB as shaded cells.
std::string severity_svg(std::span<const SeverityRow> rows, const std::string& title);

}  // namespace phasor_sentinel
