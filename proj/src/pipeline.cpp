#include "phasor_sentinel/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "phasor_sentinel/io.hpp"
#include "phasor_sentinel/parallel.hpp"
#include "phasor_sentinel/report.hpp"
#include "phasor_sentinel/svg.hpp"

namespace phasor_sentinel {

using nlohmann::json;

namespace {

json config_json(const RunConfig& c) {
  return json{{"pmus", c.pmus},
              {"minutes", c.minutes},
              {"seed", c.seed},
              {"spoof_start", c.spoof_start},
              {"spoofs", c.spoofs},
              {"features", c.features},
              {"window", c.window},
              {"train_timing", c.train_timing},
              {"stride", c.stride},
              {"train_minutes", c.train_minutes},
              {"test_minutes", c.test_minutes},
              {"C", c.C},
              {"gamma", c.gamma},
              {"tol", c.tol},
              {"max_passes", c.max_passes},
              {"ensemble", c.ensemble},
              {"severity_spoof", c.severity_spoof}};
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

RunConfig config_from(const json& j) {
  RunConfig c;
  read_if(j, "pmus", c.pmus);
  read_if(j, "minutes", c.minutes);
  read_if(j, "seed", c.seed);
  read_if(j, "spoof_start", c.spoof_start);
  read_if(j, "spoofs", c.spoofs);
  read_if(j, "features", c.features);
  read_if(j, "window", c.window);
  read_if(j, "train_timing", c.train_timing);
  read_if(j, "stride", c.stride);
  read_if(j, "train_minutes", c.train_minutes);
  read_if(j, "test_minutes", c.test_minutes);
  read_if(j, "C", c.C);
  read_if(j, "gamma", c.gamma);
  read_if(j, "tol", c.tol);
  read_if(j, "max_passes", c.max_passes);
  read_if(j, "ensemble", c.ensemble);
  read_if(j, "severity_spoof", c.severity_spoof);
  return c;
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

RunConfig resolve(RunConfig c) {
  if (c.pmus < 2) throw ValidationError("need at least 2 PMUs");
  if (c.minutes < 2) throw ValidationError("need at least 2 minutes (train and test)");
  if (c.spoofs.empty()) {
    for (const auto& e : nine_spoof_suite()) c.spoofs.push_back(e.code);
  }
  for (const auto& s : c.spoofs) suite_entry(s);
  parse_feature_set(c.features);
  parse_timing(c.train_timing);
  validate_window(c.window);
  if (c.window > kCyclesPerMinute) throw ValidationError("window longer than a minute");
  if (c.stride < 1) throw ValidationError("stride must be >= 1");
  if (!(c.C > 0) || !(c.gamma > 0) || !(c.tol > 0)) throw ValidationError("C, gamma and tol must be positive");
  if (c.max_passes < 1) throw ValidationError("max_passes must be >= 1");
  if (c.spoof_start < c.window || c.spoof_start >= kCyclesPerMinute - kDetectionRun) {
    throw ValidationError("spoof start must leave a full window before it and room to detect after it");
  }
  if (c.train_minutes.empty() && c.test_minutes.empty()) {
    const int train = c.minutes > 3 ? c.minutes - 3 : c.minutes - 1;
    for (int m = 1; m <= c.minutes; ++m) (m <= train ? c.train_minutes : c.test_minutes).push_back(m);
  } else if (c.test_minutes.empty() || c.train_minutes.empty()) {
    auto& given = c.train_minutes.empty() ? c.test_minutes : c.train_minutes;
    auto& other = c.train_minutes.empty() ? c.train_minutes : c.test_minutes;
    const std::set<int> taken(given.begin(), given.end());
    for (int m = 1; m <= c.minutes; ++m) {
      if (!taken.count(m)) other.push_back(m);
    }
  }
  c.train_minutes = sorted_unique(c.train_minutes);
  c.test_minutes = sorted_unique(c.test_minutes);
  if (c.train_minutes.empty() || c.test_minutes.empty()) throw ValidationError("train and test splits must be non-empty");
  for (const auto* split : {&c.train_minutes, &c.test_minutes}) {
    for (int m : *split) {
      if (m < 1 || m > c.minutes) throw ValidationError("minute " + std::to_string(m) + " is out of range");
    }
  }
  for (int m : c.test_minutes) {
    if (std::binary_search(c.train_minutes.begin(), c.train_minutes.end(), m)) {
      throw ValidationError("minute " + std::to_string(m) + " is in both train and test splits");
    }
  }
  if (c.ensemble && c.spoofs.size() != nine_spoof_suite().size()) {
    throw ValidationError("the leave-one-out ensemble needs all nine spoofs (disable it for a subset)");
  }
  if (!c.severity_spoof.empty() && std::find(c.spoofs.begin(), c.spoofs.end(), c.severity_spoof) == c.spoofs.end()) {
    throw ValidationError("severity spoof " + c.severity_spoof + " is not part of the run");
  }
  return c;
}

std::string config_to_json(const RunConfig& config) { return config_json(config).dump(2) + "\n"; }

RunConfig config_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (auto it = j.find("schema"); it != j.end()) {
      check_schema(it->get<std::string>(), "manifest");
      return config_from(j.at("config"));
    }
    return config_from(j);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed run config: ") + e.what());
  }
}

std::string config_hash(const RunConfig& config) {
  const std::string text = config_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FleetConfig fleet_config(const RunConfig& c) {
  FleetConfig f = default_fleet_config();
  if (c.pmus != f.pmu_count) {
    f.pmu_count = c.pmus;
    f.electrical_distance = default_electrical_distance(c.pmus);
  }
  f.minutes = c.minutes;
  f.seed = c.seed;
  return f;
}

SvmParams svm_params(const RunConfig& c) {
  SvmParams p;
  p.C = c.C;
  p.gamma = c.gamma;
  p.tol = c.tol;
  p.max_passes = c.max_passes;
  return p;
}

RunResult run_pipeline(const RunConfig& input, int jobs) {
  RunResult result;
  result.config = resolve(input);
  const RunConfig& cfg = result.config;
  const auto fleet = generate_fleet(fleet_config(cfg));
  const FeatureSetId features = parse_feature_set(cfg.features);
  const ExampleOptions train_options{features, cfg.window, parse_timing(cfg.train_timing), cfg.stride};

  const std::size_t n = cfg.spoofs.size();
  result.models.resize(n);
  result.reports.resize(n);
  std::vector<EvalSet> sets(n);
  parallel_for(
      static_cast<std::int64_t>(n),
      [&](std::int64_t k) {
        const auto idx = static_cast<std::size_t>(k);
        const auto& entry = suite_entry(cfg.spoofs[idx]);
        auto spoofed = [&](int minute_id) {
          auto spec = suite_spec(entry, minute_id, cfg.pmus, cfg.seed);
          spec.start_cycle = cfg.spoof_start;
          return apply_spoof(fleet[static_cast<std::size_t>(minute_id - 1)], spec);
        };
        LabeledSet train;
        for (int m : cfg.train_minutes) train.append(build_examples(spoofed(m), train_options, 1));
        SvmModel model = train_svm(train.x, train.y, svm_params(cfg));
        model.meta.spoof = entry.code;
        model.meta.feature_set = cfg.features;
        model.meta.window = cfg.window;
        model.meta.timing = cfg.train_timing;
        model.meta.stride = cfg.stride;
        model.meta.train_minutes = cfg.train_minutes;

        std::vector<SpoofedMinute> test;
        for (int m : cfg.test_minutes) test.push_back(spoofed(m));
        sets[idx] = build_eval_set(test, features, cfg.window, 1);
        sets[idx].spoof = entry.code;
        result.reports[idx] = evaluate_spoof_specific(model, sets[idx], 1);
        result.models[idx] = std::move(model);
      },
      jobs);

  if (cfg.ensemble) result.ensemble = evaluate_ensemble_loo(result.models, sets, jobs);

  if (!cfg.severity_spoof.empty()) {
    const auto& entry = suite_entry(cfg.severity_spoof);
    const int minute_id = cfg.test_minutes.front();
    auto spec = suite_spec(entry, minute_id, cfg.pmus, cfg.seed);
    spec.start_cycle = cfg.spoof_start;
    const auto minute = apply_spoof(fleet[static_cast<std::size_t>(minute_id - 1)], spec);
    const auto& channels = severity_channels();
    std::vector<FeatureTable> tables(kStandardWindows.size());
    parallel_for(
        static_cast<std::int64_t>(tables.size()),
        [&](std::int64_t w) {
          tables[static_cast<std::size_t>(w)] =
              correlate_fleet(minute.dataset, kStandardWindows[static_cast<std::size_t>(w)], channels, 1);
        },
        jobs);
    std::vector<TrajectoryBundle> bundles;
    for (Parameter ch : channels) {
      for (const auto& table : tables) {
        bundles.push_back(extract_trajectories(table, ch, spec.target_pmu, spec.start_cycle));
        if (ch == Parameter::Freq && table.window == 300) result.trajectory = bundles.back();
      }
    }
    result.severity = severity_report(bundles);
  }
  return result;
}

void write_run(const std::filesystem::path& dir, const RunResult& result, bool force, bool emit_svg) {
  const auto manifest_path = dir / "manifest.json";
  ensure_writable(manifest_path, force);
  std::vector<std::string> models;
  std::vector<std::string> reports;
  auto emit = [&](std::vector<std::string>& list, const std::string& rel, const std::string& content) {
    write_text_file(dir / rel, content, force);
    list.push_back(rel);
  };
  for (const auto& m : result.models) emit(models, "models/" + m.meta.spoof + ".json", model_to_json(m));
  emit(reports, "report/spoof_specific.csv", spoof_specific_csv(result.reports));
  emit(reports, "report/spoof_specific.txt", spoof_specific_text(result.reports));
  emit(reports, "report/latency.csv", latency_csv(result.reports));
  if (result.ensemble) {
    emit(reports, "report/ensemble.csv", ensemble_csv(*result.ensemble));
    emit(reports, "report/ensemble.txt", ensemble_text(*result.ensemble));
  }
  if (!result.severity.empty()) {
    emit(reports, "report/severity.csv", severity_csv(result.severity));
    if (emit_svg) {
      const auto& spoof = result.config.severity_spoof;
      emit(reports, "report/trajectory_" + spoof + "_freq_w300.svg",
           trajectory_svg(result.trajectory, spoof + ": frequency correlation, W=300"));
      emit(reports, "report/severity_" + spoof + ".svg", severity_svg(result.severity, spoof + ": MCD / MCOOB"));
    }
  }
  json manifest{{"schema", schema_tag("manifest")},
                {"config", config_json(result.config)},
                {"config_hash", config_hash(result.config)},
                {"models", models},
                {"reports", reports}};
  write_text_file(manifest_path, manifest.dump(2) + "\n", true);
}

RunConfig load_manifest_config(const std::filesystem::path& manifest) {
  return config_from_json(read_text_file(manifest));
}

std::string minute_file_name(int minute_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "minute_%02d.csv", minute_id);
  return buf;
}

std::filesystem::path labels_path_for(const std::filesystem::path& frames) {
  auto p = frames;
  p.replace_extension(".labels.csv");
  return p;
}

std::filesystem::path spec_path_for(const std::filesystem::path& frames) {
  auto p = frames;
  p.replace_extension(".spoof.json");
  return p;
}

SpoofedMinute load_spoofed_minute(const std::filesystem::path& frames) {
  SpoofedMinute out;
  out.dataset = load_frames(frames);
  const auto spec_path = spec_path_for(frames);
  if (!std::filesystem::exists(spec_path)) return unspoofed(std::move(out.dataset));
  out.spec = load_spoof_spec(spec_path);
  const auto labels_path = labels_path_for(frames);
  if (std::filesystem::exists(labels_path)) {
    const auto tracks = load_labels(labels_path);
    if (out.spec.target_pmu < 0 || out.spec.target_pmu >= static_cast<int>(tracks.size())) {
      throw ValidationError("labels file does not cover the spoofed PMU");
    }
    out.label_track = tracks[static_cast<std::size_t>(out.spec.target_pmu)];
  } else {
    out.label_track.assign(static_cast<std::size_t>(out.dataset.cycles()), false);
    for (auto c = static_cast<std::size_t>(out.spec.start_cycle); c < out.label_track.size(); ++c) {
      out.label_track[c] = true;
    }
  }
  if (static_cast<std::int64_t>(out.label_track.size()) != out.dataset.cycles()) {
    throw ValidationError("labels do not cover every cycle of " + frames.string());
  }
  return out;
}

std::vector<std::filesystem::path> minute_files(const std::filesystem::path& dir, const std::vector<int>& minutes) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> out;
  if (!minutes.empty()) {
    for (int m : minutes) {
      auto p = dir / minute_file_name(m);
      if (!std::filesystem::exists(p)) throw ValidationError("missing input " + p.string());
      out.push_back(p);
    }
    return out;
  }
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() == 13 && name.rfind("minute_", 0) == 0 && name.substr(9) == ".csv") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ValidationError("no minute_NN.csv files in " + dir.string());
  return out;
}

std::vector<int> parse_minute_list(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    if (item.empty()) throw ValidationError("bad minute list '" + text + "'");
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(static_cast<int>(parse_int(item)));
    } else {
      const auto lo = parse_int(item.substr(0, dash));
      const auto hi = parse_int(item.substr(dash + 1));
      if (hi < lo) throw ValidationError("bad minute range '" + item + "'");
      for (auto m = lo; m <= hi; ++m) out.push_back(static_cast<int>(m));
    }
    pos = comma + 1;
  }
  return out;
}

}  // namespace phasor_sentinel
