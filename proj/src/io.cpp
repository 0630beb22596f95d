#include "phasor_sentinel/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "phasor_sentinel/error.hpp"

namespace phasor_sentinel {

using nlohmann::json;

namespace {

constexpr std::string_view kTool = "phasor-sentinel";

// "# schema=<tag> key=value ..." -> tag and attributes.
struct CommentLine {
  std::string tag;
  std::vector<std::pair<std::string, std::string>> attrs;

  std::string get(std::string_view key) const {
    for (const auto& [k, v] : attrs) {
      if (k == key) return v;
    }
    throw ValidationError("schema line lacks '" + std::string(key) + "'");
  }
};

CommentLine parse_comment(std::string_view line, std::string_view kind) {
  if (line.empty() || line.front() != '#') {
    throw ValidationError("missing schema line for " + std::string(kind));
  }
  CommentLine out;
  std::istringstream words{std::string(line.substr(1))};
  std::string word;
  while (words >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) continue;
    out.attrs.emplace_back(word.substr(0, eq), word.substr(eq + 1));
  }
  out.tag = out.get("schema");
  check_schema(out.tag, kind);
  return out;
}

bool getline_trimmed(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void expect_header(std::istream& in, std::string_view header) {
  std::string line;
  if (!getline_trimmed(in, line) || line != header) {
    throw ValidationError("unexpected CSV header, want '" + std::string(header) + "'");
  }
}

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
double rad(double deg) { return deg * std::numbers::pi / 180.0; }

std::ofstream open_output(const std::filesystem::path& path, bool force) {
  ensure_writable(path, force);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string schema_tag(std::string_view kind) {
  return std::string(kTool) + "." + std::string(kind) + "/" + std::to_string(kSchemaMajor) + "." +
         std::to_string(kSchemaMinor);
}

void check_schema(std::string_view tag, std::string_view kind) {
  const std::string prefix = std::string(kTool) + "." + std::string(kind) + "/";
  if (tag.substr(0, prefix.size()) != prefix) {
    throw ValidationError("schema '" + std::string(tag) + "' is not a " + std::string(kind) + " file");
  }
  const auto version = tag.substr(prefix.size());
  const auto dot = version.find('.');
  int major = -1;
  const auto head = version.substr(0, dot);
  const auto res = std::from_chars(head.data(), head.data() + head.size(), major);
  if (res.ec != std::errc() || major != kSchemaMajor) {
    throw ValidationError("unsupported schema version '" + std::string(version) + "' for " + std::string(kind));
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("bad number '" + std::string(text) + "'");
  }
  return v;
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("bad integer '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string format_frame_row(const PhasorFrame& f) {
  std::string s;
  s.reserve(160);
  s += std::to_string(f.cycle);
  s += ',';
  s += std::to_string(f.pmu_id);
  for (const Phasor* p : {&f.va, &f.vb, &f.vc}) {
    s += ',';
    s += format_double(p->magnitude());
    s += ',';
    s += format_double(deg(p->angle()));
  }
  s += ',';
  s += format_double(f.freq);
  s += ',';
  s += format_double(f.rocof);
  return s;
}

PhasorFrame parse_frame_row(std::string_view line) {
  const auto cols = split_csv(line);
  if (cols.size() != 10) throw ValidationError("frame row needs 10 columns: '" + std::string(line) + "'");
  PhasorFrame f;
  f.cycle = parse_int(cols[0]);
  f.pmu_id = static_cast<int>(parse_int(cols[1]));
  f.va = Phasor(parse_double(cols[2]), rad(parse_double(cols[3])));
  f.vb = Phasor(parse_double(cols[4]), rad(parse_double(cols[5])));
  f.vc = Phasor(parse_double(cols[6]), rad(parse_double(cols[7])));
  f.freq = parse_double(cols[8]);
  f.rocof = parse_double(cols[9]);
  return f;
}

void write_frames_csv(std::ostream& out, const MinuteDataset& minute) {
  out << "# schema=" << schema_tag("frames") << " minute=" << minute.minute_id << " pmus=" << minute.pmu_count()
      << '\n'
      << kFramesHeader << '\n';
  for (std::int64_t c = 0; c < minute.cycles(); ++c) {
    for (const auto& stream : minute.streams) out << format_frame_row(stream[static_cast<std::size_t>(c)]) << '\n';
  }
}

MinuteDataset read_frames_csv(std::istream& in) {
  std::string line;
  if (!getline_trimmed(in, line)) throw ValidationError("empty frames file");
  const auto meta = parse_comment(line, "frames");
  expect_header(in, kFramesHeader);
  MinuteDataset minute;
  minute.minute_id = static_cast<int>(parse_int(meta.get("minute")));
  const auto pmus = parse_int(meta.get("pmus"));
  if (pmus < 1) throw ValidationError("frames file declares no PMUs");
  minute.streams.resize(static_cast<std::size_t>(pmus));
  while (getline_trimmed(in, line)) {
    if (line.empty()) continue;
    PhasorFrame f = parse_frame_row(line);
    if (f.pmu_id < 0 || f.pmu_id >= pmus) throw ValidationError("PMU id out of range in frames file");
    minute.streams[static_cast<std::size_t>(f.pmu_id)].push_back(f);
  }
  return minute;
}

void save_frames(const std::filesystem::path& path, const MinuteDataset& minute, bool force) {
  auto out = open_output(path, force);
  write_frames_csv(out, minute);
  if (!out) throw RuntimeError("write failed: " + path.string());
}

MinuteDataset load_frames(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_frames_csv(in);
}

std::optional<PhasorFrame> FrameStreamReader::next() {
  std::string line;
  while (getline_trimmed(in_, line)) {
    ++line_;
    if (line.empty()) continue;
    if (line.front() == '#') {
      parse_comment(line, "frames");
      continue;
    }
    if (!header_seen_ && line == kFramesHeader) {
      header_seen_ = true;
      continue;
    }
    try {
      return parse_frame_row(line);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_) + ": " + e.what());
    }
  }
  return std::nullopt;
}

void write_labels_csv(std::ostream& out, const SpoofedMinute& minute) {
  out << "# schema=" << schema_tag("labels") << " minute=" << minute.dataset.minute_id
      << " pmus=" << minute.dataset.pmu_count() << '\n'
      << "cycle,pmu_id,is_spoofed\n";
  for (std::int64_t c = 0; c < minute.dataset.cycles(); ++c) {
    for (int p = 0; p < minute.dataset.pmu_count(); ++p) {
      out << c << ',' << p << ',' << (minute.is_spoofed(p, c) ? "true" : "false") << '\n';
    }
  }
}

void save_labels(const std::filesystem::path& path, const SpoofedMinute& minute, bool force) {
  auto out = open_output(path, force);
  write_labels_csv(out, minute);
}

std::vector<std::vector<bool>> load_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!getline_trimmed(in, line)) throw ValidationError("empty labels file");
  const auto meta = parse_comment(line, "labels");
  expect_header(in, "cycle,pmu_id,is_spoofed");
  std::vector<std::vector<bool>> tracks(static_cast<std::size_t>(parse_int(meta.get("pmus"))));
  while (getline_trimmed(in, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 3) throw ValidationError("labels row needs 3 columns");
    const auto cycle = parse_int(cols[0]);
    const auto pmu = parse_int(cols[1]);
    if (pmu < 0 || pmu >= static_cast<std::int64_t>(tracks.size())) throw ValidationError("PMU id out of range");
    auto& t = tracks[static_cast<std::size_t>(pmu)];
    if (cycle != static_cast<std::int64_t>(t.size())) throw ValidationError("labels file is not cycle-ordered");
    if (cols[2] != "true" && cols[2] != "false") throw ValidationError("is_spoofed must be true or false");
    t.push_back(cols[2] == "true");
  }
  return tracks;
}

void save_spoof_spec(const std::filesystem::path& path, const SpoofSpec& spec, int minute_id, bool force) {
  json j;
  j["schema"] = schema_tag("spoof");
  j["minute"] = minute_id;
  j["kind"] = to_string(spec.kind);
  j["dilation"] = to_string(spec.dilation);
  j["target_pmu"] = spec.target_pmu;
  j["start_cycle"] = spec.start_cycle;
  j["noise_seed"] = spec.noise_seed;
  j["polyfit_noise"] = spec.polyfit_noise;
  j["crossfade_cycles"] = spec.crossfade_cycles;
  write_text_file(path, j.dump(2) + "\n", force);
}

SpoofSpec load_spoof_spec(const std::filesystem::path& path) {
  try {
    const json j = json::parse(read_text_file(path));
    check_schema(j.at("schema").get<std::string>(), "spoof");
    SpoofSpec s;
    s.kind = parse_spoof_kind(j.at("kind").get<std::string>());
    s.dilation = parse_ratio(j.at("dilation").get<std::string>());
    s.target_pmu = j.at("target_pmu").get<int>();
    s.start_cycle = j.at("start_cycle").get<std::int64_t>();
    s.noise_seed = j.at("noise_seed").get<std::uint64_t>();
    s.polyfit_noise = j.at("polyfit_noise").get<bool>();
    s.crossfade_cycles = j.at("crossfade_cycles").get<int>();
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_features_csv(std::ostream& out, const FeatureTable& table) {
  out << "# schema=" << schema_tag("features") << " window=" << table.window << " pmus=" << table.pmu_count << '\n'
      << "cycle,pmu_i,pmu_j";
  for (Parameter p : table.channels) out << ',' << parameter_name(p);
  out << ",degenerate_mask\n";
  for (const auto& row : table.rows) {
    out << row.cycle << ',' << row.pmu_i << ',' << row.pmu_j;
    for (Parameter p : table.channels) out << ',' << format_double(row.r[static_cast<std::size_t>(index_of(p))]);
    out << ',' << static_cast<int>(row.degenerate_mask) << '\n';
  }
}

void save_features(const std::filesystem::path& path, const FeatureTable& table, bool force) {
  auto out = open_output(path, force);
  write_features_csv(out, table);
}

FeatureTable load_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!getline_trimmed(in, line)) throw ValidationError("empty features file");
  const auto meta = parse_comment(line, "features");
  FeatureTable table;
  table.window = static_cast<int>(parse_int(meta.get("window")));
  table.pmu_count = static_cast<int>(parse_int(meta.get("pmus")));
  if (!getline_trimmed(in, line)) throw ValidationError("features file lacks a header");
  const auto head = split_csv(line);
  if (head.size() < 4 || head[0] != "cycle" || head[1] != "pmu_i" || head[2] != "pmu_j" ||
      head.back() != "degenerate_mask") {
    throw ValidationError("unexpected features header");
  }
  for (std::size_t k = 3; k + 1 < head.size(); ++k) table.channels.push_back(parse_parameter(std::string(head[k])));
  while (getline_trimmed(in, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != head.size()) throw ValidationError("features row has the wrong column count");
    FeatureRow row;
    row.cycle = parse_int(cols[0]);
    row.pmu_i = static_cast<int>(parse_int(cols[1]));
    row.pmu_j = static_cast<int>(parse_int(cols[2]));
    for (std::size_t k = 0; k < table.channels.size(); ++k) {
      row.r[static_cast<std::size_t>(index_of(table.channels[k]))] = parse_double(cols[3 + k]);
    }
    row.degenerate_mask = static_cast<std::uint8_t>(parse_int(cols.back()));
    table.rows.push_back(row);
  }
  if (table.pair_count() > 0 && table.rows.size() % static_cast<std::size_t>(table.pair_count()) != 0) {
    throw ValidationError("features file does not hold whole cycles");
  }
  return table;
}

std::string model_to_json(const SvmModel& m) {
  json j;
  j["schema"] = schema_tag("model");
  j["kernel"] = {{"type", "rbf"}, {"gamma", m.gamma}};
  j["C"] = m.C;
  j["class_weights"] = {{"spoofed", m.weight_spoofed}, {"normal", m.weight_normal}};
  j["standardizer"] = {{"mean", m.standardizer.mean},
                       {"scale", m.standardizer.scale},
                       {"constant_features", m.standardizer.constant_features}};
  j["bias"] = m.bias;
  j["coef"] = m.coef;
  json sv = json::array();
  for (std::size_t t = 0; t < m.support_vectors.rows(); ++t) {
    const auto r = m.support_vectors.row(t);
    sv.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["support_vectors"] = std::move(sv);
  j["metadata"] = {{"spoof", m.meta.spoof},
                   {"feature_set", m.meta.feature_set},
                   {"window", m.meta.window},
                   {"timing", m.meta.timing},
                   {"stride", m.meta.stride},
                   {"train_minutes", m.meta.train_minutes},
                   {"train_examples", m.meta.train_examples}};
  j["diagnostics"] = {{"iterations", m.diagnostics.iterations},
                      {"violation", m.diagnostics.violation},
                      {"objective", m.diagnostics.objective},
                      {"bounded_support_vectors", m.diagnostics.bounded_support_vectors}};
  return j.dump(1) + "\n";
}

SvmModel model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    check_schema(j.at("schema").get<std::string>(), "model");
    if (j.at("kernel").at("type").get<std::string>() != "rbf") throw ValidationError("only RBF models are supported");
    SvmModel m;
    m.gamma = j.at("kernel").at("gamma").get<double>();
    m.C = j.at("C").get<double>();
    m.weight_spoofed = j.at("class_weights").at("spoofed").get<double>();
    m.weight_normal = j.at("class_weights").at("normal").get<double>();
    const auto& st = j.at("standardizer");
    m.standardizer.mean = st.at("mean").get<std::vector<double>>();
    m.standardizer.scale = st.at("scale").get<std::vector<double>>();
    m.standardizer.constant_features = st.at("constant_features").get<std::vector<std::size_t>>();
    m.bias = j.at("bias").get<double>();
    m.coef = j.at("coef").get<std::vector<double>>();
    const std::size_t dim = m.standardizer.mean.size();
    if (m.standardizer.scale.size() != dim) throw ValidationError("standardizer mean/scale size mismatch");
    m.support_vectors = FeatureMatrix(dim);
    for (const auto& row : j.at("support_vectors")) m.support_vectors.append(row.get<std::vector<double>>());
    if (m.support_vectors.rows() != m.coef.size()) throw ValidationError("support vector/coefficient count mismatch");
    const auto& meta = j.at("metadata");
    m.meta.spoof = meta.at("spoof").get<std::string>();
    m.meta.feature_set = meta.at("feature_set").get<std::string>();
    m.meta.window = meta.at("window").get<int>();
    m.meta.timing = meta.at("timing").get<std::string>();
    m.meta.stride = meta.at("stride").get<int>();
    m.meta.train_minutes = meta.at("train_minutes").get<std::vector<int>>();
    m.meta.train_examples = meta.at("train_examples").get<std::int64_t>();
    const auto& d = j.at("diagnostics");
    m.diagnostics.iterations = d.at("iterations").get<std::int64_t>();
    m.diagnostics.violation = d.at("violation").get<double>();
    m.diagnostics.objective = d.at("objective").get<double>();
    m.diagnostics.bounded_support_vectors = d.at("bounded_support_vectors").get<std::size_t>();
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const SvmModel& model, bool force) {
  write_text_file(path, model_to_json(model), force);
}

SvmModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_text_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ensure_writable(const std::filesystem::path& path, bool force) {
  if (!force && std::filesystem::exists(path)) {
    throw ValidationError(path.string() + " exists (use --force to overwrite)");
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

void write_text_file(const std::filesystem::path& path, std::string_view content, bool force) {
  auto out = open_output(path, force);
  out << content;
  if (!out) throw RuntimeError("write failed: " + path.string());
}

}  // namespace phasor_sentinel
