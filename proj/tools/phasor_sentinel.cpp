// phasor-sentinel: synthesize PMU data, inject spoofs, extract correlation
// features, train and evaluate detectors.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "phasor_sentinel/detection.hpp"
#include "phasor_sentinel/io.hpp"
#include "phasor_sentinel/parallel.hpp"
#include "phasor_sentinel/pipeline.hpp"
#include "phasor_sentinel/report.hpp"
#include "phasor_sentinel/stream.hpp"
#include "phasor_sentinel/svg.hpp"

namespace fs = std::filesystem;
using namespace phasor_sentinel;

namespace {

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  for (auto part : split_csv(text)) out.push_back(parse_double(part));
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto part : split_csv(text)) {
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

std::vector<SpoofedMinute> load_minutes(const fs::path& dir, const std::vector<int>& minutes) {
  std::vector<SpoofedMinute> out;
  for (const auto& p : minute_files(dir, minutes)) out.push_back(load_spoofed_minute(p));
  return out;
}

std::vector<int> minute_ids(const std::vector<SpoofedMinute>& minutes) {
  std::vector<int> ids;
  for (const auto& m : minutes) ids.push_back(m.dataset.minute_id);
  return ids;
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  int pmus = 10;
  int minutes = 14;
  std::uint64_t seed = 7;
  std::string out;
  bool force = false;
};

void cmd_synth(const SynthArgs& a) {
  FleetConfig cfg = default_fleet_config();
  if (a.pmus != cfg.pmu_count) {
    if (a.pmus < 2) throw ValidationError("--pmus must be at least 2");
    cfg.pmu_count = a.pmus;
    cfg.electrical_distance = default_electrical_distance(a.pmus);
  }
  cfg.minutes = a.minutes;
  cfg.seed = a.seed;
  validate(cfg);
  const fs::path dir(a.out);
  for (int m = 1; m <= cfg.minutes; ++m) ensure_writable(dir / minute_file_name(m), a.force);
  const auto fleet = generate_fleet(cfg);
  for (const auto& minute : fleet) save_frames(dir / minute_file_name(minute.minute_id), minute, a.force);
  std::cout << "wrote " << fleet.size() << " minutes to " << dir.string() << '\n';
}

// ---- spoof ---------------------------------------------------------------

struct SpoofArgs {
  std::string in;
  std::string out;
  std::string minutes;
  std::string suite;
  std::string kind;
  std::string ratio = "2";
  int pmu = -1;
  std::int64_t start = kCyclesPerMinute / 2;
  std::uint64_t seed = 7;
  bool no_noise = false;
  int crossfade = 30;
  bool force = false;
};

// Spoofed frames file: target rows from cycle `start` on are re-rendered,
// every other line is copied from the input verbatim.
void write_spoofed_frames(const fs::path& src, const fs::path& dst, const SpoofedMinute& spoofed, bool force) {
  std::ifstream in(src, std::ios::binary);
  if (!in) throw RuntimeError("cannot open " + src.string());
  ensure_writable(dst, force);
  std::ofstream out(dst, std::ios::binary);
  if (!out) throw RuntimeError("cannot open " + dst.string() + " for writing");
  const auto& spec = spoofed.spec;
  const auto& stream = spoofed.dataset.streams[static_cast<std::size_t>(spec.target_pmu)];
  std::string line;
  int header_lines = 0;
  while (std::getline(in, line)) {
    if (header_lines < 2) {
      ++header_lines;
      out << line << '\n';
      continue;
    }
    const auto cols = split_csv(line);
    if (cols.size() >= 2) {
      const auto cycle = parse_int(cols[0]);
      const auto pmu = parse_int(cols[1]);
      if (pmu == spec.target_pmu && cycle >= spec.start_cycle) {
        out << format_frame_row(stream[static_cast<std::size_t>(cycle)]) << '\n';
        continue;
      }
    }
    out << line << '\n';
  }
  if (!out) throw RuntimeError("write failed: " + dst.string());
}

void spoof_directory(const SpoofArgs& a, const fs::path& out_dir, const SuiteEntry* entry, const SpoofSpec& base) {
  const auto files = minute_files(a.in, a.minutes.empty() ? std::vector<int>{} : parse_minute_list(a.minutes));
  for (const auto& f : files) {
    const auto minute = load_frames(f);
    SpoofSpec spec = base;
    if (entry) {
      spec = suite_spec(*entry, minute.minute_id, minute.pmu_count(), a.seed);
      spec.start_cycle = a.start;
      spec.polyfit_noise = !a.no_noise;
      spec.crossfade_cycles = a.crossfade;
    } else if (a.pmu < 0) {
      spec.target_pmu = (minute.minute_id - 1) % minute.pmu_count();
    }
    if (!entry) spec.noise_seed = a.seed ^ (static_cast<std::uint64_t>(minute.minute_id) << 32);
    const auto spoofed = apply_spoof(minute, spec);
    const auto dst = out_dir / f.filename();
    write_spoofed_frames(f, dst, spoofed, a.force);
    save_labels(labels_path_for(dst), spoofed, a.force);
    save_spoof_spec(spec_path_for(dst), spec, minute.minute_id, a.force);
  }
  std::cout << "wrote " << files.size() << " spoofed minutes to " << out_dir.string() << '\n';
}

void cmd_spoof(const SpoofArgs& a) {
  if (!a.suite.empty()) {
    if (a.suite != "nine") throw ValidationError("unknown suite '" + a.suite + "' (expected nine)");
    for (const auto& e : nine_spoof_suite()) spoof_directory(a, fs::path(a.out) / e.code, &e, {});
    return;
  }
  if (a.kind.empty()) throw ValidationError("give --kind or --suite");
  SpoofSpec spec;
  spec.kind = parse_spoof_kind(a.kind);
  if (spec.kind == SpoofKind::Dilate) spec.dilation = parse_ratio(a.ratio);
  spec.target_pmu = a.pmu;
  spec.start_cycle = a.start;
  spec.polyfit_noise = !a.no_noise;
  spec.crossfade_cycles = a.crossfade;
  spoof_directory(a, a.out, nullptr, spec);
}

// ---- features ------------------------------------------------------------

struct FeaturesArgs {
  std::string data;
  std::string minutes;
  std::string out;
  int window = 300;
  std::string channels = "five";
  bool force = false;
};

void cmd_features(const FeaturesArgs& a) {
  validate_window(a.window);
  std::vector<Parameter> channels;
  if (a.channels == "all") {
    channels.assign(kAllParameters.begin(), kAllParameters.end());
  } else if (a.channels == "three" || a.channels == "five") {
    channels = feature_channels(parse_feature_set(a.channels));
  } else {
    for (const auto& name : split_list(a.channels)) channels.push_back(parse_parameter(name));
  }
  const auto files = minute_files(a.data, a.minutes.empty() ? std::vector<int>{} : parse_minute_list(a.minutes));
  for (const auto& f : files) {
    const auto table = correlate_fleet(load_frames(f), a.window, channels);
    auto dst = fs::path(a.out) / f.filename();
    dst.replace_extension(".features.csv");
    save_features(dst, table, a.force);
  }
  std::cout << "wrote features for " << files.size() << " minutes to " << a.out << '\n';
}

// ---- train / grid --------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string train_minutes = "1-11";
  std::string spoof;
  std::string features = "five";
  int window = 300;
  std::string timing = "late";
  int stride = 20;
  double C = 1.0;
  double gamma = 0.2;
  double tol = 1e-3;
  int max_passes = 1000;
  std::string out;
  bool force = false;
};

LabeledSet assemble(const std::vector<SpoofedMinute>& minutes, const ExampleOptions& options) {
  std::vector<LabeledSet> parts(minutes.size());
  parallel_for(static_cast<std::int64_t>(minutes.size()), [&](std::int64_t k) {
    parts[static_cast<std::size_t>(k)] = build_examples(minutes[static_cast<std::size_t>(k)], options, 1);
  });
  LabeledSet out;
  for (const auto& p : parts) out.append(p);
  return out;
}

void cmd_train(const TrainArgs& a) {
  ensure_writable(a.out, a.force);
  const auto minutes = load_minutes(a.data, parse_minute_list(a.train_minutes));
  const ExampleOptions options{parse_feature_set(a.features), a.window, parse_timing(a.timing), a.stride};
  const auto train = assemble(minutes, options);
  SvmParams p;
  p.C = a.C;
  p.gamma = a.gamma;
  p.tol = a.tol;
  p.max_passes = a.max_passes;
  SvmModel model = train_svm(train.x, train.y, p);
  model.meta.spoof = a.spoof.empty() ? fs::path(a.data).filename().string() : a.spoof;
  model.meta.feature_set = to_string(options.features);
  model.meta.window = a.window;
  model.meta.timing = to_string(options.timing);
  model.meta.stride = a.stride;
  model.meta.train_minutes = minute_ids(minutes);
  save_model(a.out, model, a.force);
  std::cout << "trained on " << train.size() << " examples: " << model.coef.size() << " support vectors, "
            << model.diagnostics.iterations << " iterations -> " << a.out << '\n';
}

struct GridArgs {
  std::string data;
  std::string train_minutes = "1-8";
  std::string validate_minutes = "9-11";
  std::string features = "three,five";
  std::string c_grid = "0.1,1,10";
  std::string gamma_grid = "0.05,0.2,1";
  int window = 300;
  std::string timing = "late";
  int stride = 20;
  std::string out;
  bool force = false;
};

void cmd_grid(const GridArgs& a) {
  if (!a.out.empty()) ensure_writable(a.out, a.force);
  const auto train_ids = parse_minute_list(a.train_minutes);
  const auto val_ids = parse_minute_list(a.validate_minutes);
  for (int m : val_ids) {
    if (std::find(train_ids.begin(), train_ids.end(), m) != train_ids.end()) {
      throw ValidationError("minute " + std::to_string(m) + " is in both train and validate");
    }
  }
  const auto train_minutes = load_minutes(a.data, train_ids);
  const auto val_minutes = load_minutes(a.data, val_ids);
  std::vector<GridData> data;
  for (const auto& name : split_list(a.features)) {
    const auto id = parse_feature_set(name);
    GridData d;
    d.feature_set = to_string(id);
    d.train = assemble(train_minutes, {id, a.window, parse_timing(a.timing), a.stride});
    d.validate = assemble(val_minutes, {id, a.window, TimingRule::Early, 1});
    data.push_back(std::move(d));
  }
  const auto cs = parse_doubles(a.c_grid);
  const auto gs = parse_doubles(a.gamma_grid);
  const auto grid = grid_search(data, cs, gs);
  const auto csv = grid_csv(grid);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(a.out, csv, a.force);
  }
  const auto& best = grid.cells[grid.best];
  std::cerr << "best: features=" << best.feature_set << " C=" << best.C << " gamma=" << best.gamma
            << " F1=" << best.f1 << '\n';
  for (const auto& c : grid.cells) {
    if (c.f1_undefined) std::cerr << "warning: F1 undefined for C=" << c.C << " gamma=" << c.gamma << " (reported as 0)\n";
  }
}

// ---- eval / ensemble -----------------------------------------------------

struct EvalArgs {
  std::string model;
  std::string data;
  std::string test_minutes = "12-14";
  std::string out;
  bool force = false;
};

void cmd_eval(const EvalArgs& a) {
  const auto model = load_model(a.model);
  const auto ids = parse_minute_list(a.test_minutes);
  for (int m : ids) {
    if (std::find(model.meta.train_minutes.begin(), model.meta.train_minutes.end(), m) !=
        model.meta.train_minutes.end()) {
      throw ValidationError("test minute " + std::to_string(m) + " was used to train " + a.model);
    }
  }
  const auto minutes = load_minutes(a.data, ids);
  auto set = build_eval_set(minutes, parse_feature_set(model.meta.feature_set), model.meta.window);
  set.spoof = model.meta.spoof;
  const std::vector<DetectionReport> reports{evaluate_spoof_specific(model, set)};
  if (!a.out.empty()) {
    const fs::path dir(a.out);
    write_text_file(dir / "spoof_specific.csv", spoof_specific_csv(reports), a.force);
    write_text_file(dir / "latency.csv", latency_csv(reports), a.force);
  }
  std::cout << spoof_specific_text(reports);
}

struct EnsembleArgs {
  std::string models;
  std::string model_dir;
  std::string data;
  std::string test_minutes = "12-14";
  std::string out;
  bool force = false;
};

void cmd_ensemble(const EnsembleArgs& a) {
  std::vector<fs::path> paths;
  if (!a.model_dir.empty()) {
    for (const auto& e : nine_spoof_suite()) paths.push_back(fs::path(a.model_dir) / (e.code + ".json"));
  }
  for (const auto& p : split_list(a.models)) paths.emplace_back(p);
  std::vector<SvmModel> models;
  for (const auto& p : paths) models.push_back(load_model(p));
  const auto ids = parse_minute_list(a.test_minutes);
  std::vector<EvalSet> sets(models.size());
  parallel_for(static_cast<std::int64_t>(models.size()), [&](std::int64_t k) {
    const auto& m = models[static_cast<std::size_t>(k)];
    const auto minutes = load_minutes(fs::path(a.data) / m.meta.spoof, ids);
    auto& s = sets[static_cast<std::size_t>(k)];
    s = build_eval_set(minutes, parse_feature_set(m.meta.feature_set), m.meta.window, 1);
    s.spoof = m.meta.spoof;
  });
  const auto table = evaluate_ensemble_loo(models, sets);
  if (!a.out.empty()) {
    write_text_file(fs::path(a.out) / "ensemble.csv", ensemble_csv(table), a.force);
    write_text_file(fs::path(a.out) / "ensemble.txt", ensemble_text(table), a.force);
  }
  std::cout << ensemble_text(table);
}

// ---- report --------------------------------------------------------------

struct ReportArgs {
  std::string data;
  int minute = 12;
  std::string emit = "csv";
  std::string out;
  bool force = false;
};

void cmd_report(const ReportArgs& a) {
  if (a.emit != "csv" && a.emit != "svg") throw ValidationError("--emit must be csv or svg");
  const auto minute = load_spoofed_minute(minute_files(a.data, {a.minute}).front());
  const auto onset = std::find(minute.label_track.begin(), minute.label_track.end(), true);
  if (onset == minute.label_track.end()) throw ValidationError("minute " + std::to_string(a.minute) + " is not spoofed");
  const auto start = onset - minute.label_track.begin();
  const auto& channels = severity_channels();
  std::vector<TrajectoryBundle> bundles;
  std::optional<TrajectoryBundle> freq300;
  std::vector<FeatureTable> tables;
  for (int w : kStandardWindows) tables.push_back(correlate_fleet(minute.dataset, w, channels));
  for (Parameter ch : channels) {
    for (const auto& t : tables) {
      bundles.push_back(extract_trajectories(t, ch, minute.spec.target_pmu, start));
      if (ch == Parameter::Freq && t.window == 300) freq300 = bundles.back();
    }
  }
  const auto rows = severity_report(bundles);
  const fs::path dir(a.out);
  fs::path data_dir(a.data);
  if (data_dir.filename().empty()) data_dir = data_dir.parent_path();
  const std::string name = data_dir.filename().string();
  write_text_file(dir / "severity.csv", severity_csv(rows), a.force);
  if (a.emit == "svg") {
    write_text_file(dir / ("trajectory_" + name + "_freq_w300.svg"),
                    trajectory_svg(*freq300, name + ": frequency correlation, W=300"), a.force);
    write_text_file(dir / ("severity_" + name + ".svg"), severity_svg(rows, name + ": MCD / MCOOB"), a.force);
  }
  std::cout << "wrote report for " << name << " minute " << a.minute << " to " << dir.string() << '\n';
}

// ---- detect --------------------------------------------------------------

struct DetectArgs {
  std::string models;
  std::string model_dir;
  int threshold = 5;
  int pmus = 10;
  bool follow = false;
  std::string in;
  bool all_pairs = false;
};

void cmd_detect(const DetectArgs& a) {
  std::vector<SvmModel> models;
  if (!a.model_dir.empty()) {
    for (const auto& e : nine_spoof_suite()) models.push_back(load_model(fs::path(a.model_dir) / (e.code + ".json")));
  }
  for (const auto& p : split_list(a.models)) models.push_back(load_model(p));
  if (!a.follow && a.in.empty()) throw ValidationError("give --in FILE or --follow to read standard input");
  std::ifstream file;
  if (!a.follow) {
    file.open(a.in, std::ios::binary);
    if (!file) throw RuntimeError("cannot open " + a.in);
  }
  std::istream& in = a.follow ? std::cin : file;
  StreamingDetector detector(std::move(models), a.threshold, a.pmus);
  FrameStreamReader reader(in);
  std::cout << "cycle,verdict,spoofed_pairs,suspect_pmu\n";
  while (auto frame = reader.next()) {
    const auto v = detector.push(*frame);
    if (!v) continue;
    const auto spoofed = std::count_if(v->pairs.begin(), v->pairs.end(), [](const auto& p) { return p.spoofed; });
    std::cout << v->cycle << ',' << (v->spoofed ? "spoofed" : "normal") << ',' << spoofed << ',' << v->suspect_pmu
              << '\n';
    if (a.follow) std::cout.flush();
  }
}

// ---- pipeline ------------------------------------------------------------

struct PipelineArgs {
  std::string config;
  std::string manifest;
  std::string out;
  int pmus = 10;
  int minutes = 14;
  std::uint64_t seed = 7;
  int stride = 20;
  std::string spoofs;
  bool no_ensemble = false;
  bool svg = false;
  bool force = false;
};

void cmd_pipeline(const PipelineArgs& a) {
  RunConfig cfg;
  if (!a.config.empty() && !a.manifest.empty()) throw ValidationError("give --config or --manifest, not both");
  if (!a.config.empty()) {
    cfg = config_from_json(read_text_file(a.config));
  } else if (!a.manifest.empty()) {
    cfg = load_manifest_config(a.manifest);
  } else {
    cfg.pmus = a.pmus;
    cfg.minutes = a.minutes;
    cfg.seed = a.seed;
    cfg.stride = a.stride;
    cfg.spoofs = split_list(a.spoofs);
    cfg.ensemble = !a.no_ensemble;
    if (!cfg.spoofs.empty() && std::find(cfg.spoofs.begin(), cfg.spoofs.end(), "S1") == cfg.spoofs.end()) {
      cfg.severity_spoof = cfg.spoofs.front();
    }
  }
  cfg = resolve(cfg);
  ensure_writable(fs::path(a.out) / "manifest.json", a.force);
  const auto result = run_pipeline(cfg);
  write_run(a.out, result, a.force, a.svg);
  std::cout << spoof_specific_text(result.reports);
  if (result.ensemble) std::cout << '\n' << ensemble_text(*result.ensemble);
  std::cout << "\nrun written to " << a.out << " (config " << config_hash(result.config) << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PMU spoof detection from inter-PMU correlation"};
  app.require_subcommand(1);
  int jobs = 0;
  app.add_option("--jobs,-j", jobs, "worker threads (default: PHASOR_SENTINEL_JOBS or all cores)");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate synthetic multi-PMU frames");
  s->add_option("--pmus", synth.pmus, "number of PMUs (>= 2)");
  s->add_option("--minutes", synth.minutes, "minutes to generate");
  s->add_option("--seed", synth.seed, "generator seed");
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_flag("--force", synth.force, "overwrite existing files");

  SpoofArgs spoof;
  auto* sp = app.add_subcommand("spoof", "inject spoofs into frames");
  sp->add_option("--in", spoof.in, "directory of genuine minute_NN.csv files")->required();
  sp->add_option("--out", spoof.out, "output directory")->required();
  sp->add_option("--minutes", spoof.minutes, "minutes to process, e.g. 1-14");
  sp->add_option("--suite", spoof.suite, "emit the nine-spoof suite (S1, S2, S3.1-S3.7)");
  sp->add_option("--kind", spoof.kind, "mirror, polyfit or dilate");
  sp->add_option("--ratio", spoof.ratio, "dilation ratio such as 3/2");
  sp->add_option("--pmu", spoof.pmu, "target PMU (default rotates with the minute id)");
  sp->add_option("--start", spoof.start, "first spoofed cycle");
  sp->add_option("--seed", spoof.seed, "noise seed");
  sp->add_flag("--no-noise", spoof.no_noise, "polyfit without residual noise");
  sp->add_option("--crossfade", spoof.crossfade, "polyfit cross-fade cycles");
  sp->add_flag("--force", spoof.force, "overwrite existing files");

  FeaturesArgs feat;
  auto* f = app.add_subcommand("features", "sliding-window inter-PMU correlations");
  f->add_option("--data", feat.data, "directory of minute files")->required();
  f->add_option("--out", feat.out, "output directory")->required();
  f->add_option("--minutes", feat.minutes, "minutes to process");
  f->add_option("--window", feat.window, "window in cycles");
  f->add_option("--channels", feat.channels, "three, five, all, or a comma list");
  f->add_flag("--force", feat.force, "overwrite existing files");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train a spoof-specific SVM");
  t->add_option("--data", train.data, "directory of spoofed minutes")->required();
  t->add_option("--out", train.out, "model file")->required();
  t->add_option("--train-minutes", train.train_minutes, "training minutes");
  t->add_option("--spoof", train.spoof, "spoof label stored in the model");
  t->add_option("--features", train.features, "three or five");
  t->add_option("--window", train.window, "correlation window");
  t->add_option("--timing", train.timing, "late or early labelling");
  t->add_option("--stride", train.stride, "keep every n-th cycle");
  t->add_option("--C", train.C, "soft-margin penalty");
  t->add_option("--gamma", train.gamma, "RBF width");
  t->add_option("--tol", train.tol, "KKT tolerance");
  t->add_option("--max-passes", train.max_passes, "iteration cap in multiples of the example count");
  t->add_flag("--force", train.force, "overwrite existing files");

  GridArgs grid;
  auto* g = app.add_subcommand("grid", "grid search over C and gamma");
  g->add_option("--data", grid.data, "directory of spoofed minutes")->required();
  g->add_option("--train-minutes", grid.train_minutes, "training minutes");
  g->add_option("--validate-minutes", grid.validate_minutes, "validation minutes");
  g->add_option("--features", grid.features, "feature sets to try");
  g->add_option("--C-grid", grid.c_grid, "comma list of C values");
  g->add_option("--gamma-grid", grid.gamma_grid, "comma list of gamma values");
  g->add_option("--window", grid.window, "correlation window");
  g->add_option("--timing", grid.timing, "training label timing");
  g->add_option("--stride", grid.stride, "training stride");
  g->add_option("--out", grid.out, "CSV output (default stdout)");
  g->add_flag("--force", grid.force, "overwrite existing files");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "evaluate a model on held-out minutes");
  e->add_option("--model", eval.model, "model file")->required();
  e->add_option("--data", eval.data, "directory of spoofed minutes")->required();
  e->add_option("--test-minutes", eval.test_minutes, "test minutes");
  e->add_option("--out", eval.out, "report directory");
  e->add_flag("--force", eval.force, "overwrite existing files");

  EnsembleArgs ens;
  auto* en = app.add_subcommand("ensemble", "leave-one-out vote-threshold ensemble");
  en->add_option("--models", ens.models, "comma list of model files");
  en->add_option("--model-dir", ens.model_dir, "directory with S1.json .. S3.7.json");
  en->add_option("--data", ens.data, "suite directory with one subdirectory per spoof")->required();
  en->add_option("--test-minutes", ens.test_minutes, "test minutes");
  en->add_option("--out", ens.out, "report directory");
  en->add_flag("--force", ens.force, "overwrite existing files");

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "MCD/MCOOB tables and correlation plots");
  r->add_option("--data", rep.data, "directory of spoofed minutes")->required();
  r->add_option("--minute", rep.minute, "minute to analyse");
  r->add_option("--emit", rep.emit, "csv or svg");
  r->add_option("--out", rep.out, "output directory")->required();
  r->add_flag("--force", rep.force, "overwrite existing files");

  DetectArgs det;
  auto* d = app.add_subcommand("detect", "ensemble verdicts over a frame stream");
  d->add_option("--models", det.models, "comma list of model files");
  d->add_option("--model-dir", det.model_dir, "directory with S1.json .. S3.7.json");
  d->add_option("--threshold", det.threshold, "votes needed to flag a pair");
  d->add_option("--pmus", det.pmus, "PMUs in the stream");
  d->add_flag("--follow", det.follow, "read frames from standard input");
  d->add_option("--in", det.in, "frames file");

  PipelineArgs pipe;
  auto* p = app.add_subcommand("pipeline", "full synthetic run with manifest and reports");
  p->add_option("--config", pipe.config, "run config JSON");
  p->add_option("--manifest", pipe.manifest, "rerun the config recorded in a manifest");
  p->add_option("--out", pipe.out, "run directory")->required();
  p->add_option("--pmus", pipe.pmus, "number of PMUs");
  p->add_option("--minutes", pipe.minutes, "minutes to generate");
  p->add_option("--seed", pipe.seed, "generator seed");
  p->add_option("--stride", pipe.stride, "training stride");
  p->add_option("--spoofs", pipe.spoofs, "comma list of suite codes");
  p->add_flag("--no-ensemble", pipe.no_ensemble, "skip the leave-one-out ensemble");
  p->add_flag("--svg", pipe.svg, "also write SVG plots");
  p->add_flag("--force", pipe.force, "overwrite existing files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 1;
  }

  try {
    if (jobs > 0) set_worker_count(jobs);
    if (s->parsed()) cmd_synth(synth);
    if (sp->parsed()) cmd_spoof(spoof);
    if (f->parsed()) cmd_features(feat);
    if (t->parsed()) cmd_train(train);
    if (g->parsed()) cmd_grid(grid);
    if (e->parsed()) cmd_eval(eval);
    if (en->parsed()) cmd_ensemble(ens);
    if (r->parsed()) cmd_report(rep);
    if (d->parsed()) cmd_detect(det);
    if (p->parsed()) cmd_pipeline(pipe);
  } catch (const ValidationError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  }
  return 0;
}
