#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phasor_sentinel/correlation.hpp"
#include "phasor_sentinel/fleet.hpp"
#include "phasor_sentinel/spoof.hpp"
#include "phasor_sentinel/svm.hpp"

namespace phasor_sentinel {

// Every artifact starts with a schema tag "<kind>/<major>.<minor>". Readers
// accept any minor of the major they know and reject everything else.
inline constexpr int kSchemaMajor = 1;
inline constexpr int kSchemaMinor = 0;

std::string schema_tag(std::string_view kind);
/// Throws ValidationError unless `tag` names `kind` with a supported major.
void check_schema(std::string_view tag, std::string_view kind);

inline constexpr std::string_view kFramesHeader =
    "cycle,pmu,va_mag,va_ang_deg,vb_mag,vb_ang_deg,vc_mag,vc_ang_deg,freq_hz,rocof_hzps";

/// Shortest round-trip decimal form.
std::string format_double(double v);
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
std::vector<std::string_view> split_csv(std::string_view line);

std::string format_frame_row(const PhasorFrame& f);
PhasorFrame parse_frame_row(std::string_view line);

/// Frames CSV for one minute: a "# schema=... minute=<id>" line, the
/// header, then one row per (cycle, pmu), cycle-major.
void write_frames_csv(std::ostream& out, const MinuteDataset& minute);
MinuteDataset read_frames_csv(std::istream& in);
void save_frames(const std::filesystem::path& path, const MinuteDataset& minute, bool force);
MinuteDataset load_frames(const std::filesystem::path& path);

/// Line-oriented reader for frame streams (detect --follow). Accepts an
/// optional schema line and the header before the data rows.
class FrameStreamReader {
 public:
  explicit FrameStreamReader(std::istream& in) : in_(in) {}
  std::optional<PhasorFrame> next();

 private:
  std::istream& in_;
  bool header_seen_ = false;
  std::int64_t line_ = 0;
};

/// Labels CSV "cycle,pmu_id,is_spoofed", one row per (cycle, pmu).
void write_labels_csv(std::ostream& out, const SpoofedMinute& minute);
void save_labels(const std::filesystem::path& path, const SpoofedMinute& minute, bool force);
/// Returns per-PMU label tracks.
std::vector<std::vector<bool>> load_labels(const std::filesystem::path& path);

/// Spoof spec sidecar, so a spoofed minute can be reloaded with its onset.
void save_spoof_spec(const std::filesystem::path& path, const SpoofSpec& spec, int minute_id, bool force);
SpoofSpec load_spoof_spec(const std::filesystem::path& path);

/// Features CSV "cycle,pmu_i,pmu_j,<channel names>,degenerate_mask".
void write_features_csv(std::ostream& out, const FeatureTable& table);
void save_features(const std::filesystem::path& path, const FeatureTable& table, bool force);
FeatureTable load_features(const std::filesystem::path& path);

/// Model JSON; doubles are written in shortest round-trip form so a
/// save/load cycle is bit-exact.
std::string model_to_json(const SvmModel& model);
SvmModel model_from_json(std::string_view text);
void save_model(const std::filesystem::path& path, const SvmModel& model, bool force);
SvmModel load_model(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
/// Refuses to replace an existing file unless `force`.
void write_text_file(const std::filesystem::path& path, std::string_view content, bool force);
void ensure_writable(const std::filesystem::path& path, bool force);

}  // namespace phasor_sentinel
