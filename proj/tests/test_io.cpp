#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "phasor_sentinel/detection.hpp"
#include "phasor_sentinel/error.hpp"
#include "phasor_sentinel/io.hpp"

using namespace phasor_sentinel;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ps_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SvmModel small_model() {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 1.0);
  FeatureMatrix x(3);
  std::vector<int> y;
  for (int i = 0; i < 80; ++i) {
    const int label = i % 3 == 0 ? 1 : -1;
    x.append(std::vector<double>{g(rng) + label, g(rng) * 1e-3 + 0.9, g(rng) / 3.0});
    y.push_back(label);
  }
  auto m = train_svm(x, y);
  m.meta.spoof = "S2";
  m.meta.feature_set = "three";
  m.meta.stride = 20;
  m.meta.train_minutes = {1, 2, 3};
  m.meta.train_examples = 80;
  return m;
}

}  // namespace

TEST_CASE("schema tags") {
  CHECK(schema_tag("model") == "phasor-sentinel.model/1.0");
  CHECK_NOTHROW(check_schema("phasor-sentinel.model/1.7", "model"));
  CHECK_THROWS_AS(check_schema("phasor-sentinel.model/2.0", "model"), ValidationError);
  CHECK_THROWS_AS(check_schema("phasor-sentinel.frames/1.0", "model"), ValidationError);
  CHECK_THROWS_AS(check_schema("garbage", "model"), ValidationError);
}

TEST_CASE("number formatting round-trips exactly") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 10000; ++i) {
    const double v = u(rng) * std::pow(10.0, (i % 40) - 20);
    REQUIRE(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK_THROWS_AS(parse_double("1.2x"), ValidationError);
  CHECK_THROWS_AS(parse_int("7.5"), ValidationError);
  CHECK(split_csv("a,,b").size() == 3);
}

TEST_CASE("model JSON is bit-exact") {
  const auto m = small_model();
  const auto text = model_to_json(m);
  const auto back = model_from_json(text);
  CHECK(back.standardizer.mean == m.standardizer.mean);
  CHECK(back.standardizer.scale == m.standardizer.scale);
  CHECK(back.standardizer.constant_features == m.standardizer.constant_features);
  CHECK(back.support_vectors.values == m.support_vectors.values);
  CHECK(back.coef == m.coef);
  CHECK(back.bias == m.bias);
  CHECK(back.C == m.C);
  CHECK(back.gamma == m.gamma);
  CHECK(back.meta.spoof == "S2");
  CHECK(back.meta.stride == 20);
  CHECK(back.meta.train_minutes == m.meta.train_minutes);
  CHECK(back.diagnostics.iterations == m.diagnostics.iterations);
  CHECK(model_to_json(back) == text);

  FeatureMatrix probe(3);
  probe.append(std::vector<double>{0.3, 0.9, -0.2});
  CHECK(decide_batch_serial(back, probe) == decide_batch_serial(m, probe));

  auto bumped = text;
  const auto at = bumped.find("phasor-sentinel.model/1.0");
  REQUIRE(at != std::string::npos);
  bumped.replace(at, 25, "phasor-sentinel.model/2.0");
  CHECK_THROWS_AS(model_from_json(bumped), ValidationError);
  CHECK_THROWS_AS(model_from_json("{\"schema\": \"phasor-sentinel.model/1.0\"}"), ValidationError);
  CHECK_THROWS_AS(model_from_json("not json"), ValidationError);
}

TEST_CASE("frames CSV round trip") {
  auto cfg = default_fleet_config();
  cfg.pmu_count = 3;
  cfg.electrical_distance = default_electrical_distance(3);
  const auto m = generate_minute(cfg, 5);
  std::stringstream ss;
  write_frames_csv(ss, m);
  const auto text = ss.str();
  CHECK(text.rfind("# schema=phasor-sentinel.frames/1.0 minute=5 pmus=3\n", 0) == 0);
  const auto back = read_frames_csv(ss);
  CHECK(back.minute_id == 5);
  REQUIRE(back.pmu_count() == 3);
  for (int p = 0; p < 3; ++p) {
    REQUIRE(back.streams[p].size() == m.streams[p].size());
    for (std::size_t k = 0; k < m.streams[p].size(); ++k) {
      const auto& a = m.streams[p][k];
      const auto& b = back.streams[p][k];
      REQUIRE(b.cycle == a.cycle);
      REQUIRE(b.freq == a.freq);
      REQUIRE(b.rocof == a.rocof);
      REQUIRE(b.va.magnitude() == a.va.magnitude());
      REQUIRE(std::abs(b.vb.to_complex() - a.vb.to_complex()) < 1e-12);
    }
  }
  // Writing what was read gives the same bytes when angles survive the
  // degree conversion, which they do for the second pass.
  std::stringstream again, third;
  write_frames_csv(again, back);
  std::stringstream reread(again.str());
  write_frames_csv(third, read_frames_csv(reread));
  CHECK(third.str() == again.str());

  std::stringstream bad("cycle,pmu\n1,2\n");
  CHECK_THROWS_AS(read_frames_csv(bad), ValidationError);
}

TEST_CASE("frame stream reader") {
  auto cfg = default_fleet_config();
  cfg.pmu_count = 2;
  cfg.electrical_distance = default_electrical_distance(2);
  const auto m = generate_minute(cfg, 1);
  std::stringstream ss;
  write_frames_csv(ss, m);
  FrameStreamReader r(ss);
  std::size_t n = 0;
  while (auto f = r.next()) {
    CHECK(f->cycle == static_cast<std::int64_t>(n / 2));
    CHECK(f->pmu_id == static_cast<int>(n % 2));
    ++n;
  }
  CHECK(n == 7200);

  std::stringstream junk(std::string(kFramesHeader) + "\n1,0,oops\n");
  FrameStreamReader bad(junk);
  CHECK_THROWS_AS(bad.next(), ValidationError);
}

TEST_CASE("labels, spoof spec and features files") {
  TempDir dir;
  auto cfg = default_fleet_config();
  cfg.pmu_count = 3;
  cfg.electrical_distance = default_electrical_distance(3);
  SpoofSpec spec;
  spec.kind = SpoofKind::Dilate;
  spec.dilation = {6, 5};
  spec.target_pmu = 2;
  spec.noise_seed = 99;
  const auto s = apply_spoof(generate_minute(cfg, 4), spec);

  save_labels(dir.path / "l.csv", s, false);
  const auto tracks = load_labels(dir.path / "l.csv");
  REQUIRE(tracks.size() == 3);
  CHECK(tracks[2] == s.label_track);
  CHECK(tracks[2][1799] == false);
  CHECK(tracks[2][1800] == true);
  CHECK(tracks[0] == std::vector<bool>(3600, false));

  save_spoof_spec(dir.path / "s.json", spec, 4, false);
  const auto back = load_spoof_spec(dir.path / "s.json");
  CHECK(back.kind == SpoofKind::Dilate);
  CHECK(back.dilation == DilationRatio{6, 5});
  CHECK(back.target_pmu == 2);
  CHECK(back.start_cycle == 1800);
  CHECK(back.noise_seed == 99);

  const auto table = correlate_fleet(s.dataset, 120, feature_channels(FeatureSetId::Five));
  save_features(dir.path / "f.csv", table, false);
  const auto ft = load_features(dir.path / "f.csv");
  CHECK(ft.window == 120);
  CHECK(ft.pmu_count == 3);
  CHECK(ft.channels == table.channels);
  REQUIRE(ft.rows.size() == table.rows.size());
  for (std::size_t k = 0; k < ft.rows.size(); ++k) {
    REQUIRE(ft.rows[k].cycle == table.rows[k].cycle);
    REQUIRE(ft.rows[k].r == table.rows[k].r);
    REQUIRE(ft.rows[k].degenerate_mask == table.rows[k].degenerate_mask);
  }
}

TEST_CASE("existing outputs need force") {
  TempDir dir;
  const auto p = dir.path / "sub" / "out.txt";
  write_text_file(p, "one", false);
  CHECK(read_text_file(p) == "one");
  CHECK_THROWS_AS(write_text_file(p, "two", false), ValidationError);
  CHECK(read_text_file(p) == "one");
  write_text_file(p, "two", true);
  CHECK(read_text_file(p) == "two");

  const auto m = small_model();
  save_model(dir.path / "m.json", m, false);
  CHECK_THROWS_AS(save_model(dir.path / "m.json", m, false), ValidationError);
  CHECK(load_model(dir.path / "m.json").coef == m.coef);
  CHECK_THROWS_AS(load_model(dir.path / "missing.json"), RuntimeError);
}
