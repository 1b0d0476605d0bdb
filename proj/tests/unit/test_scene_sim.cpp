#include <doctest.h>

#include <cmath>
#include <numbers>

#include "doalab/errors.hpp"
#include "doalab/frame_classify.hpp"
#include "doalab/scene_sim.hpp"
#include "doalab/tde.hpp"

using namespace doalab;

namespace {

SceneSpec dry_static(double theta) {
  SceneSpec s;
  s.label = "dry";
  s.duration_s = 2.0;
  s.talker_track = {{0.0, theta}};
  s.speech_intervals = {{0.2, 1.8}};
  s.noise_rms = 0.0;
  s.seed = 11;
  return s;
}

double rms_difference(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / double(a.size()));
}

}  // namespace

TEST_CASE("default suite layout") {
  const auto suite = default_suite(0);
  REQUIRE(suite.train.size() == 8);
  CHECK(suite.test.size() == 3);
  const std::vector<int> weights{1, 1, 2, 2, 3, 2, 1, 3};
  for (std::size_t i = 0; i < 8; ++i) CHECK(suite.train[i].weight == weights[i]);

  const auto& first = suite.train[0];
  CHECK(first.talker_track.size() == 1);
  CHECK(first.distractors.empty());
  CHECK_FALSE(first.robot_noise);
  CHECK(suite.train[4].robot_noise);
  for (const auto& s : suite.train) CHECK_NOTHROW(s.validate());
}

TEST_CASE("a frontal talker gives identical channels") {
  const auto rec = render(dry_static(0.0));
  CHECK(rms_difference(rec.audio.left().samples(), rec.audio.right().samples()) <= 1e-6);
}

TEST_CASE("a lateral talker delays one ear by the Woodworth ITD") {
  // PHAT needs a noise floor here: on a noiseless band-limited source, leakage into the empty
  // bins has a constant cross phase and whitening turns it into a spurious peak at lag 0.
  auto spec = dry_static(std::numbers::pi / 2);
  spec.noise_rms = 0.005;
  const auto rec = render(spec);
  const std::size_t start = 8000, n = 8000;
  const auto l = rec.audio.left().samples().subspan(start, n);
  const auto r = rec.audio.right().samples().subspan(start, n);
  const auto out = gcc(l, r, 16000.0, WeightingKind::Phat, 20);
  const double expected = itd_woodworth(AzimuthRad(std::numbers::pi / 2), HeadModel{}) * 16000.0;
  CHECK(expected == doctest::Approx(15.29).epsilon(0.01));
  CHECK(std::abs(std::abs(double(out.result.lag_samples)) - expected) <= 1.0);
}

TEST_CASE("mirrored azimuths swap the channels") {
  const auto a = render(dry_static(0.6));
  const auto b = render(dry_static(-0.6));
  CHECK(rms_difference(a.audio.left().samples(), b.audio.right().samples()) <= 1e-9);
  CHECK(rms_difference(a.audio.right().samples(), b.audio.left().samples()) <= 1e-9);
}

TEST_CASE("speech-like synthesis") {
  const auto x = synth_speech_like(2.0, 16000.0, 5);
  const auto y = synth_speech_like(2.0, 16000.0, 5);
  CHECK(rms_difference(x.samples(), y.samples()) == 0.0);
  CHECK(x.size() == 32000);
  double power = 0.0;
  for (double v : x.samples()) power += v * v;
  CHECK(std::sqrt(power / double(x.size())) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(srmr(x, ModulationFilterbank::standard()).ratio > 1.5);
  CHECK_THROWS_AS((void)synth_speech_like(0.2, 16000.0, 5), InvalidArgument);
  CHECK_THROWS_AS((void)synth_speech_like(1.0, 16000.0, 5, 1.5), InvalidArgument);
}

TEST_CASE("a scene without speech keeps an empty label set") {
  auto s = dry_static(0.0);
  s.speech_intervals.clear();
  s.noise_rms = 0.01;
  const auto rec = render(s);
  CHECK(rec.speech_intervals.empty());
  CHECK(rec.audio.size() == 32000);
}

TEST_CASE("scene json round trip") {
  for (const auto& s : default_suite(3).train) {
    const auto back = scene_from_json(to_json(s));
    CHECK(to_json(back) == to_json(s));
  }
  const auto e = echo_scene(2, 0.7, -std::numbers::pi / 3);
  CHECK(to_json(scene_from_json(to_json(e))) == to_json(e));
  CHECK(e.echoes.size() == 1);
  CHECK(latency_scene(1, 4).speech_intervals.size() == 4);
}

TEST_CASE("scene validation") {
  auto s = dry_static(0.0);
  SUBCASE("azimuth outside the frontal half plane") { s.talker_track = {{0.0, 2.0}}; }
  SUBCASE("knot after the end") { s.talker_track = {{0.0, 0.0}, {3.0, 0.1}}; }
  SUBCASE("echo gain of one") { s.echoes = {Echo{0.005, 1.0, 0.0}}; }
  SUBCASE("negative noise") { s.noise_rms = -1.0; }
  SUBCASE("interval outside the recording") { s.speech_intervals = {{1.5, 2.5}}; }
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  CHECK_THROWS_AS((void)render(s), InvalidArgument);
}
