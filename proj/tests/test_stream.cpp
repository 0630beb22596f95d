#include "doctest.h"
#include "phasor_sentinel/detection.hpp"
#include "phasor_sentinel/error.hpp"
#include "phasor_sentinel/stream.hpp"

using namespace phasor_sentinel;

namespace {

SvmModel ball_model(const std::vector<double>& center, double bias, int window) {
  SvmModel m;
  m.standardizer.mean.assign(center.size(), 0.0);
  m.standardizer.scale.assign(center.size(), 1.0);
  m.support_vectors = FeatureMatrix(center.size());
  m.support_vectors.append(center);
  m.coef = {-1.0};
  m.bias = bias;
  m.gamma = 0.5;
  m.meta.feature_set = "five";
  m.meta.window = window;
  return m;
}

}  // namespace

TEST_CASE("streaming verdicts equal the batch pipeline") {
  const auto cfg = default_fleet_config();
  const auto s = apply_spoof(generate_minute(cfg, 3), suite_spec(suite_entry("S1"), 3, cfg.pmu_count, cfg.seed));
  // Spoofed when far from a typical healthy correlation vector.
  std::vector<SvmModel> models = {ball_model({0.9, 1.0, 0.9, 0.2, 0.2}, 0.3, 120),
                                  ball_model({0.8, 1.0, 0.95, 0.1, 0.1}, 0.2, 120),
                                  ball_model({0.85, 1.0, 0.9, 0.0, 0.3}, 0.4, 120)};
  const int threshold = 2;

  const auto table = correlate_fleet_serial(ChannelTable::from_dataset(s.dataset), 120,
                                            feature_channels(FeatureSetId::Five));
  ExampleOptions opt;
  opt.window = 120;
  opt.timing = TimingRule::Early;
  const auto ex = build_examples(s, table, opt);
  std::vector<std::vector<double>> margins;
  for (const auto& m : models) margins.push_back(decide_batch_serial(m, ex.x));

  StreamingDetector det(models, threshold, cfg.pmu_count);
  std::size_t row = 0, verdicts = 0, spoofed_cycles = 0;
  for (std::int64_t c = 0; c < s.dataset.cycles(); ++c) {
    for (int p = 0; p < cfg.pmu_count; ++p) {
      const auto v = det.push(s.dataset.streams[static_cast<std::size_t>(p)][static_cast<std::size_t>(c)]);
      if (p + 1 < cfg.pmu_count) {
        REQUIRE_FALSE(v.has_value());
        continue;
      }
      if (c < 119) {
        REQUIRE_FALSE(v.has_value());
        continue;
      }
      REQUIRE(v.has_value());
      ++verdicts;
      CHECK(v->cycle == c);
      REQUIRE(v->pairs.size() == 45);
      bool any = false;
      for (const auto& pv : v->pairs) {
        REQUIRE(ex.cycle[row] == c);
        REQUIRE(ex.pmu_i[row] == pv.pmu_i);
        REQUIRE(ex.pmu_j[row] == pv.pmu_j);
        int votes = 0;
        for (const auto& mg : margins) votes += label_of(mg[row]) == Label::Spoofed;
        REQUIRE(pv.votes == votes);
        REQUIRE(pv.spoofed == (votes >= threshold));
        any = any || pv.spoofed;
        ++row;
      }
      CHECK(v->spoofed == any);
      if (any) {
        ++spoofed_cycles;
        CHECK(v->suspect_pmu >= 0);
      } else {
        CHECK(v->suspect_pmu == -1);
      }
    }
  }
  CHECK(verdicts == 3600 - 119);
  CHECK(row == ex.size());
  MESSAGE("cycles flagged: " << spoofed_cycles);
}

TEST_CASE("streaming input validation") {
  std::vector<SvmModel> models = {ball_model({0, 0, 0, 0, 0}, 0.1, 60)};
  CHECK_THROWS_AS(StreamingDetector(models, 2, 3), ValidationError);
  CHECK_THROWS_AS(StreamingDetector(models, 1, 1), ValidationError);
  auto mixed = models;
  mixed.push_back(ball_model({0, 0, 0, 0, 0}, 0.1, 120));
  CHECK_THROWS_AS(StreamingDetector(mixed, 1, 3), ValidationError);

  StreamingDetector det(models, 1, 3);
  PhasorFrame f;
  f.cycle = 5;
  f.pmu_id = 0;
  det.push(f);
  CHECK_THROWS_AS(det.push(f), ValidationError);  // duplicate
  f.pmu_id = 1;
  f.cycle = 4;
  CHECK_THROWS_AS(det.push(f), ValidationError);  // out of order
  f.pmu_id = 7;
  f.cycle = 5;
  CHECK_THROWS_AS(det.push(f), ValidationError);
}
