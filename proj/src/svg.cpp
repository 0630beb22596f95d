#include "phasor_sentinel/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace phasor_sentinel {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string trajectory_svg(const TrajectoryBundle& bundle, const std::string& title) {
  constexpr double kWidth = 800, kHeight = 360, kLeft = 50, kRight = 20, kTop = 30, kBottom = 40;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  std::size_t len = 0;
  for (const auto& s : bundle.spoofed) len = std::max(len, s.size());
  for (const auto& s : bundle.nonspoofed) len = std::max(len, s.size());
  const double span = len > 1 ? static_cast<double>(len - 1) : 1.0;
  auto px = [&](std::size_t k) { return kLeft + plot_w * static_cast<double>(k) / span; };
  auto py = [&](double r) { return kTop + plot_h * (1.0 - (std::clamp(r, -1.0, 1.0) + 1.0) / 2.0); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<style>.normal{stroke:#9aa0a6;stroke-width:0.8;fill:none}"
         ".spoofed{stroke:#d93025;stroke-width:1.2;fill:none}"
         "text{font:12px sans-serif}</style>\n"
      << "<text x=\"" << kLeft << "\" y=\"18\">" << escape(title) << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (double r : {-1.0, 0.0, 1.0}) {
    svg << "<text x=\"8\" y=\"" << num(py(r) + 4) << "\">" << num(r) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft << "\" y=\"" << kHeight - 10 << "\">cycle " << bundle.first_cycle << "</text>\n"
      << "<text x=\"" << kWidth - kRight - 80 << "\" y=\"" << kHeight - 10 << "\">cycle "
      << bundle.first_cycle + static_cast<std::int64_t>(len) - 1 << "</text>\n";

  auto polyline = [&](const std::vector<double>& s, const char* cls) {
    svg << "<polyline class=\"" << cls << "\" points=\"";
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (k) svg << ' ';
      svg << num(px(k)) << ',' << num(py(s[k]));
    }
    svg << "\"/>\n";
  };
  // Normal pairs first so the spoofed curves are drawn on top.
  for (const auto& s : bundle.nonspoofed) polyline(s, "normal");
  for (const auto& s : bundle.spoofed) polyline(s, "spoofed");
  svg << "</svg>\n";
  return svg.str();
}

std::string severity_svg(std::span<const SeverityRow> rows, const std::string& title) {
  constexpr double kCell = 90, kRowH = 22, kLabelW = 170, kTop = 50;
  double max_mcd = 0.0, max_mcoob = 0.0;
  for (const auto& r : rows) {
    max_mcd = std::max(max_mcd, r.mean_mcd());
    max_mcoob = std::max(max_mcoob, r.mean_mcoob());
  }
  const double width = kLabelW + 2 * kCell + 20;
  const double height = kTop + kRowH * static_cast<double>(rows.size()) + 20;
  auto shade = [](double v, double vmax) {
    const int level = vmax > 0 ? static_cast<int>(255.0 * (1.0 - std::clamp(v / vmax, 0.0, 1.0))) : 255;
    char buf[16];
    std::snprintf(buf, sizeof buf, "#ff%02x%02x", level, level);
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
      << "<style>text{font:12px sans-serif}</style>\n"
      << "<text x=\"10\" y=\"18\">" << escape(title) << "</text>\n"
      << "<text x=\"" << kLabelW << "\" y=\"40\">mean MCD</text>\n"
      << "<text x=\"" << kLabelW + kCell << "\" y=\"40\">mean MCOOB</text>\n";
  double y = kTop;
  for (const auto& r : rows) {
    svg << "<text x=\"10\" y=\"" << num(y + 15) << "\">" << parameter_name(r.channel) << " W=" << r.window << ' '
        << (r.spoofed ? "spoofed" : "normal") << "</text>\n"
        << "<rect class=\"mcd\" x=\"" << kLabelW << "\" y=\"" << num(y) << "\" width=\"" << kCell - 4
        << "\" height=\"" << kRowH - 4 << "\" fill=\"" << shade(r.mean_mcd(), max_mcd) << "\"><title>"
        << num(r.mean_mcd()) << "</title></rect>\n"
        << "<rect class=\"mcoob\" x=\"" << kLabelW + kCell << "\" y=\"" << num(y) << "\" width=\"" << kCell - 4
        << "\" height=\"" << kRowH - 4 << "\" fill=\"" << shade(r.mean_mcoob(), max_mcoob) << "\"><title>"
        << num(r.mean_mcoob()) << "</title></rect>\n";
    y += kRowH;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace phasor_sentinel
