#include "phasor_sentinel/detection.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "phasor_sentinel/parallel.hpp"

namespace phasor_sentinel {

const std::vector<Parameter>& feature_channels(FeatureSetId id) {
  static const std::vector<Parameter> three = {Parameter::VPosMag, Parameter::VPosAng, Parameter::Freq};
  static const std::vector<Parameter> five = {Parameter::VPosMag, Parameter::VPosAng, Parameter::Freq,
                                              Parameter::VNegAng, Parameter::VZeroAng};
  return id == FeatureSetId::Three ? three : five;
}

std::string to_string(FeatureSetId id) { return id == FeatureSetId::Three ? "three" : "five"; }

FeatureSetId parse_feature_set(const std::string& text) {
  if (text == "three" || text == "3") return FeatureSetId::Three;
  if (text == "five" || text == "5") return FeatureSetId::Five;
  throw ValidationError("unknown feature set '" + text + "' (expected three or five)");
}

std::string to_string(TimingRule rule) { return rule == TimingRule::Early ? "early" : "late"; }

TimingRule parse_timing(const std::string& text) {
  if (text == "early") return TimingRule::Early;
  if (text == "late") return TimingRule::Late;
  throw ValidationError("unknown timing rule '" + text + "' (expected early or late)");
}

bool window_label(TimingRule rule, int spoofed_cycles, int window) {
  if (rule == TimingRule::Early) return spoofed_cycles >= 1;
  return 2 * spoofed_cycles > window;
}

LabeledSet build_examples(const SpoofedMinute& minute, const FeatureTable& table, const ExampleOptions& options) {
  if (table.window != options.window) {
    throw ValidationError("feature window " + std::to_string(table.window) + " does not match example window " +
                          std::to_string(options.window));
  }
  if (options.stride < 1) throw ValidationError("stride must be >= 1");
  const auto& channels = feature_channels(options.features);
  for (Parameter p : channels) {
    if (std::find(table.channels.begin(), table.channels.end(), p) == table.channels.end()) {
      throw ValidationError("feature table lacks channel " + std::string(parameter_name(p)));
    }
  }
  const int pmus = table.pmu_count;
  if (pmus != minute.dataset.pmu_count()) throw ValidationError("feature table PMU count mismatch");
  const auto n = static_cast<std::size_t>(minute.dataset.cycles());

  // Prefix counts of spoofed cycles per pair.
  const auto pairs = all_pairs(pmus);
  std::vector<std::vector<int>> prefix(pairs.size(), std::vector<int>(n + 1, 0));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    for (std::size_t c = 0; c < n; ++c) {
      const auto cyc = static_cast<std::int64_t>(c);
      prefix[p][c + 1] = prefix[p][c] + ((minute.is_spoofed(i, cyc) || minute.is_spoofed(j, cyc)) ? 1 : 0);
    }
  }

  LabeledSet out;
  out.x = FeatureMatrix(channels.size());
  std::vector<double> x(channels.size());
  const std::int64_t first = table.rows.empty() ? 0 : table.rows.front().cycle;
  for (std::int64_t c = 0; c < table.cycle_count(); ++c) {
    const std::int64_t cycle = table.at(c, 0).cycle;
    if ((cycle - first) % options.stride != 0) continue;
    const auto end = static_cast<std::size_t>(cycle) + 1;
    const auto begin = end - static_cast<std::size_t>(options.window);
    for (int p = 0; p < table.pair_count(); ++p) {
      const FeatureRow& row = table.at(c, p);
      for (std::size_t k = 0; k < channels.size(); ++k) x[k] = row.r[static_cast<std::size_t>(index_of(channels[k]))];
      out.x.append(x);
      const int spoofed = prefix[static_cast<std::size_t>(p)][end] - prefix[static_cast<std::size_t>(p)][begin];
      out.y.push_back(window_label(options.timing, spoofed, options.window) ? 1 : -1);
      out.minute.push_back(minute.dataset.minute_id);
      out.cycle.push_back(cycle);
      out.pmu_i.push_back(row.pmu_i);
      out.pmu_j.push_back(row.pmu_j);
    }
  }
  return out;
}

LabeledSet build_examples(const SpoofedMinute& minute, const ExampleOptions& options, int jobs) {
  const auto table = correlate_fleet(minute.dataset, options.window, feature_channels(options.features), jobs);
  return build_examples(minute, table, options);
}

std::optional<std::int64_t> latency(std::span<const std::uint8_t> predictions) {
  int run = 0;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    run = predictions[k] ? run + 1 : 0;
    if (run == kDetectionRun) return static_cast<std::int64_t>(k) + 1;
  }
  return std::nullopt;
}

LatencySummary summarize(std::span<const SpoofedPair> pairs) {
  LatencySummary s;
  s.pairs = static_cast<std::int64_t>(pairs.size());
  double sum = 0.0;
  for (const auto& p : pairs) {
    if (!p.latency) continue;
    const std::int64_t v = *p.latency;
    if (s.detected == 0) {
      s.min = s.max = v;
    } else {
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
    }
    ++s.detected;
    sum += static_cast<double>(v);
  }
  if (s.detected > 0) s.mean = sum / static_cast<double>(s.detected);
  return s;
}

EvalSet build_eval_set(std::span<const SpoofedMinute> minutes, FeatureSetId features, int window, int jobs) {
  EvalSet set;
  set.features = features;
  set.window = window;
  set.examples.x = FeatureMatrix(feature_channels(features).size());
  ExampleOptions options{features, window, TimingRule::Early, 1};
  std::vector<LabeledSet> parts(minutes.size());
  parallel_for(
      static_cast<std::int64_t>(minutes.size()),
      [&](std::int64_t k) {
        const auto& m = minutes[static_cast<std::size_t>(k)];
        parts[static_cast<std::size_t>(k)] = build_examples(m, options, 1);
      },
      jobs);
  for (std::size_t k = 0; k < minutes.size(); ++k) {
    set.examples.append(parts[k]);
    const auto& m = minutes[k];
    auto first = std::find(m.label_track.begin(), m.label_track.end(), true);
    if (first != m.label_track.end()) {
      set.onsets.push_back({m.dataset.minute_id, m.spec.target_pmu, first - m.label_track.begin()});
    }
  }
  return set;
}

DetectionReport score(const EvalSet& set, std::span<const std::uint8_t> predicted) {
  const auto& ex = set.examples;
  if (predicted.size() != ex.size()) throw ValidationError("prediction count does not match examples");
  DetectionReport report;
  report.spoof = set.spoof;
  for (std::size_t t = 0; t < ex.size(); ++t) report.counts.add(predicted[t] != 0, ex.y[t] > 0);
  report.metrics = metrics(report.counts);

  // Post-onset verdict streams of the pairs that involve the target PMU.
  std::map<std::tuple<int, int, int>, std::vector<std::uint8_t>> streams;
  std::map<int, const EvalSet::Onset*> onset_of;
  for (const auto& o : set.onsets) onset_of[o.minute] = &o;
  for (std::size_t t = 0; t < ex.size(); ++t) {
    auto it = onset_of.find(ex.minute[t]);
    if (it == onset_of.end()) continue;
    const auto& o = *it->second;
    if (ex.pmu_i[t] != o.target_pmu && ex.pmu_j[t] != o.target_pmu) continue;
    if (ex.cycle[t] < o.start_cycle) continue;
    auto& s = streams[{ex.minute[t], ex.pmu_i[t], ex.pmu_j[t]}];
    if (ex.cycle[t] != o.start_cycle + static_cast<std::int64_t>(s.size())) {
      throw ValidationError("latency needs contiguous cycles from spoof onset");
    }
    s.push_back(predicted[t]);
  }
  for (const auto& [key, s] : streams) {
    const auto [minute, i, j] = key;
    report.pairs.push_back({minute, i, j, latency(s)});
  }
  report.latency = summarize(report.pairs);
  return report;
}

namespace {

void check_model_fits(const SvmModel& model, const EvalSet& set) {
  if (model.meta.feature_set != to_string(set.features)) {
    throw ValidationError("model feature set '" + model.meta.feature_set + "' does not match test features '" +
                          to_string(set.features) + "'");
  }
  if (model.meta.window != set.window) throw ValidationError("model window does not match test window");
  const std::set<int> trained(model.meta.train_minutes.begin(), model.meta.train_minutes.end());
  for (const auto& o : set.onsets) {
    if (trained.count(o.minute)) {
      throw ValidationError("test minute " + std::to_string(o.minute) + " was used to train the model");
    }
  }
  for (int m : set.examples.minute) {
    if (trained.count(m)) throw ValidationError("test minute " + std::to_string(m) + " was used to train the model");
  }
}

std::vector<std::uint8_t> verdicts(const SvmModel& model, const FeatureMatrix& x, bool parallel, int jobs) {
  const auto margins = parallel ? decide_batch(model, x, jobs) : decide_batch_serial(model, x);
  std::vector<std::uint8_t> out(margins.size());
  for (std::size_t t = 0; t < margins.size(); ++t) out[t] = label_of(margins[t]) == Label::Spoofed;
  return out;
}

}  // namespace

DetectionReport evaluate_spoof_specific(const SvmModel& model, const EvalSet& set, int jobs) {
  check_model_fits(model, set);
  auto report = score(set, verdicts(model, set.examples.x, true, jobs));
  if (report.spoof.empty()) report.spoof = model.meta.spoof;
  return report;
}

Label ensemble_vote(std::span<const SvmModel> models, std::span<const double> x, int threshold) {
  if (models.empty()) throw ValidationError("ensemble needs at least one model");
  for (const auto& m : models) {
    if (m.meta.feature_set != models.front().meta.feature_set || m.dim() != models.front().dim()) {
      throw ValidationError("ensemble models use different feature sets");
    }
  }
  if (threshold < 1 || threshold > static_cast<int>(models.size())) {
    throw ValidationError("threshold must lie in [1, " + std::to_string(models.size()) + "]");
  }
  int votes = 0;
  for (const auto& m : models) votes += decide(m, x).label == Label::Spoofed ? 1 : 0;
  return votes >= threshold ? Label::Spoofed : Label::Normal;
}

EnsembleTable evaluate_ensemble_loo(std::span<const SvmModel> models, std::span<const EvalSet> sets, int jobs) {
  constexpr std::size_t kSuiteSize = 9;
  if (models.size() < kSuiteSize) throw ValidationError("leave-one-out ensemble needs nine trained models");
  if (sets.size() != models.size()) throw ValidationError("one test set per model is required");
  for (const auto& m : models) {
    if (m.meta.feature_set != models.front().meta.feature_set) {
      throw ValidationError("ensemble models use different feature sets");
    }
  }
  const std::size_t n = models.size();
  for (std::size_t s = 0; s < n; ++s) check_model_fits(models[s], sets[s]);

  // Vote counts of the other n-1 models on each held-out test set.
  std::vector<std::vector<std::vector<std::uint8_t>>> votes(n, std::vector<std::vector<std::uint8_t>>(n));
  parallel_for(
      static_cast<std::int64_t>(n * n),
      [&](std::int64_t k) {
        const auto s = static_cast<std::size_t>(k) / n;
        const auto m = static_cast<std::size_t>(k) % n;
        if (s == m) return;
        votes[s][m] = verdicts(models[m], sets[s].examples.x, false, 1);
      },
      jobs);
  std::vector<std::vector<int>> counts(n);
  for (std::size_t s = 0; s < n; ++s) {
    counts[s].assign(sets[s].examples.size(), 0);
    for (std::size_t m = 0; m < n; ++m) {
      if (m == s) continue;
      for (std::size_t t = 0; t < counts[s].size(); ++t) counts[s][t] += votes[s][m][t];
    }
  }

  EnsembleTable table;
  for (std::size_t s = 0; s < n; ++s) {
    table.spoofs.push_back(sets[s].spoof.empty() ? models[s].meta.spoof : sets[s].spoof);
  }
  for (int threshold = 1; threshold < static_cast<int>(n); ++threshold) {
    EnsembleRow row;
    row.threshold = threshold;
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<std::uint8_t> pred(counts[s].size());
      for (std::size_t t = 0; t < pred.size(); ++t) pred[t] = counts[s][t] >= threshold;
      auto report = score(sets[s], pred);
      report.spoof = table.spoofs[s];
      row.counts += report.counts;
      row.held_out.push_back(std::move(report));
    }
    row.metrics = metrics(row.counts);
    table.rows.push_back(std::move(row));
  }
  return table;
}

LatencySummary pooled_latency(const EnsembleRow& row, const std::string& prefix) {
  std::vector<SpoofedPair> pooled;
  for (const auto& r : row.held_out) {
    if (r.spoof.rfind(prefix, 0) == 0) pooled.insert(pooled.end(), r.pairs.begin(), r.pairs.end());
  }
  return summarize(pooled);
}

}  // namespace phasor_sentinel
