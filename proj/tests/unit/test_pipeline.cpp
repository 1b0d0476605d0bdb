#include <doctest.h>

#include <cmath>
#include <numbers>

#include "doalab/errors.hpp"
#include "doalab/pipeline.hpp"
#include "doalab/scene_sim.hpp"
#include "doalab/stats.hpp"

using namespace doalab;
using doctest::Approx;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

AnnotatedRecording silent(double seconds) {
  AnnotatedRecording r;
  const auto n = static_cast<std::size_t>(seconds * 16000);
  r.audio = StereoSignal(MonoSignal(std::vector<double>(n, 0.0), 16000), MonoSignal(std::vector<double>(n, 0.0), 16000));
  r.angle_track = {{0, 0}};
  return r;
}

DoaEstimate estimate(double start, double size, bool accepted, double angle = 0.0) {
  DoaEstimate e;
  e.frame_start_s = start;
  e.frame_size_s = size;
  e.accepted = accepted;
  if (accepted) e.angle = AzimuthRad(angle);
  return e;
}

SceneSpec static_scene(double azimuth_deg, std::uint64_t seed) {
  SceneSpec s;
  s.duration_s = 4.0;
  s.seed = seed;
  s.talker_track = {{0.0, azimuth_deg * kDeg}};
  s.speech_intervals = {{0.5, 2.0}, {2.6, 3.7}};
  s.noise_rms = 0.005;
  return s;
}

}  // namespace

TEST_CASE("best parameters") {
  const auto p = PipelineParams::best();
  CHECK(p.classifier == ClassifierKind::Srmr);
  CHECK(p.timing == WeightingKind::Phat);
  CHECK(p.framing.frame_size_s == 0.34);
  CHECK(p.framing.step_fraction == 0.9);
  CHECK(p.thresholds.delta_low() == 1.5);
  CHECK(p.thresholds.delta_high() == 7.0);
}

TEST_CASE("annotated recording validation") {
  auto r = silent(1.0);
  r.speech_intervals = {{0.5, 0.6}, {0.2, 0.3}};
  CHECK_THROWS_AS(r.validate(), InvalidArgument);
  r.speech_intervals = {{0.2, 0.5}, {0.4, 0.6}};
  CHECK_THROWS_AS(r.validate(), InvalidArgument);
  r.speech_intervals = {};
  r.angle_track = {{0.5, 0}, {0.5, 1}};
  CHECK_THROWS_AS(r.validate(), InvalidArgument);
  r.angle_track = {{0, 0}};
  r.weight = 0;
  CHECK_THROWS_AS(r.validate(), InvalidArgument);
}

TEST_CASE("angle track interpolation and overlap") {
  auto r = silent(2.0);
  r.angle_track = {{0.0, 0.0}, {1.0, 1.0}};
  CHECK(r.angle_at(-1) == 0.0);
  CHECK(r.angle_at(0.25) == Approx(0.25));
  CHECK(r.angle_at(5) == 1.0);
  r.speech_intervals = {{0.2, 0.4}, {1.0, 1.5}};
  CHECK(r.speech_overlap(0.3, 1.2) == Approx(0.3));
}

TEST_CASE("ground truth labels") {
  auto r = silent(3.0);
  r.speech_intervals = {{1.0, 2.0}};
  CHECK(ground_truth_label(1.2, 0.5, r));
  CHECK_FALSE(ground_truth_label(1.8, 0.5, r));  // 0.2 of 0.5 s = 40%
  CHECK(ground_truth_label(1.75, 0.5, r));       // exactly half
  CHECK_FALSE(ground_truth_label(2.5, 0.4, r));
}

TEST_CASE("metrics examples") {
  auto r = silent(3.0);
  r.speech_intervals = {{0.0, 2.0}};
  r.angle_track = {{0.0, 0.3}};
  SUBCASE("perfect") {
    const std::vector<DoaEstimate> e{estimate(0, 0.5, true, 0.3), estimate(0.5, 0.5, true, 0.3)};
    const auto m = evaluate(e, r);
    CHECK(m.f1 == 1.0);
    CHECK(m.mse == 0.0);
    CHECK_FALSE(m.no_speech_windows);
  }
  SUBCASE("nothing accepted") {
    const std::vector<DoaEstimate> e{estimate(0, 0.5, false), estimate(2.5, 0.5, false)};
    const auto m = evaluate(e, r);
    CHECK(m.no_speech_windows);
    CHECK(m.f1 == 0.0);
  }
  SUBCASE("half the true positives off by 0.2 rad") {
    const std::vector<DoaEstimate> e{estimate(0, 0.5, true, 0.3), estimate(0.5, 0.5, true, 0.5),
                                     estimate(1.0, 0.5, true, 0.3), estimate(1.5, 0.5, true, 0.1)};
    CHECK(evaluate(e, r).mse == Approx(0.02).epsilon(1e-12));
  }
  SUBCASE("confusion counts") {
    const std::vector<DoaEstimate> e{estimate(0, 0.5, true, 0.3), estimate(0.5, 0.5, false),
                                     estimate(2.2, 0.5, true, 0.3), estimate(1.0, 0.5, true, 0.3)};
    const auto m = evaluate(e, r);
    CHECK(m.n_true_positive == 2);
    CHECK(m.n_false_positive == 1);
    CHECK(m.n_false_negative == 1);
    CHECK(m.f1 == Approx(2.0 * 2 / (2 * 2 + 1 + 1)));
  }
}

TEST_CASE("silence yields no accepted frames") {
  auto p = PipelineParams::best();
  p.classifier = ClassifierKind::PowerOnset;
  for (const auto& e : run_pipeline(silent(2.0), p, HeadModel{})) CHECK_FALSE(e.accepted);
  CHECK(run_pipeline(silent(0.2), p, HeadModel{}).empty());
}

TEST_CASE("static talker at 30 degrees, channel swap negates") {
  auto rec = render(static_scene(30, 4));
  const auto est = run_pipeline(rec, PipelineParams::best(), HeadModel{});
  std::vector<double> errors;
  for (const auto& e : est) {
    if (e.accepted) errors.push_back(std::abs(e.angle->degrees() - 30));
    CHECK(e.emit_time_s >= e.frame_start_s + e.frame_size_s);
  }
  REQUIRE(!errors.empty());
  CHECK(median(errors) < 3.0);

  rec.audio = rec.audio.swapped();
  const auto swapped = run_pipeline(rec, PipelineParams::best(), HeadModel{});
  REQUIRE(swapped.size() == est.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est[i].accepted) CHECK(swapped[i].angle->value() == Approx(-est[i].angle->value()));
  }
}

TEST_CASE("frame analysis agrees with run_pipeline") {
  const auto rec = render(static_scene(-20, 9));
  const auto p = PipelineParams::best();
  FrameAnalysis fa(rec, p.classifier, p.timing, p.framing, HeadModel{});
  const auto a = fa.estimates(p.thresholds);
  const auto b = run_pipeline(rec, p, HeadModel{});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].accepted == b[i].accepted);
    if (a[i].accepted) CHECK(a[i].angle->value() == b[i].angle->value());
  }
}

TEST_CASE("streaming session matches batch processing") {
  const auto rec = render(static_scene(45, 12));
  const auto p = PipelineParams::best();
  const auto batch = run_pipeline(rec, p, HeadModel{});
  StreamingSession s(p, HeadModel{}, 16000);
  std::vector<DoaEstimate> streamed;
  const auto l = rec.audio.left().samples(), r = rec.audio.right().samples();
  for (std::size_t at = 0; at < l.size(); at += 160) {
    const auto n = std::min<std::size_t>(160, l.size() - at);
    const auto out = s.push(l.subspan(at, n), r.subspan(at, n), double(at + n) / 16000);
    streamed.insert(streamed.end(), out.begin(), out.end());
  }
  REQUIRE(streamed.size() == batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(streamed[i].frame_start_s == Approx(batch[i].frame_start_s));
    CHECK(streamed[i].accepted == batch[i].accepted);
    CHECK(streamed[i].emit_time_s >= streamed[i].frame_start_s + streamed[i].frame_size_s - 1e-9);
  }
}

TEST_CASE("latency experiment") {
  const std::vector<AnnotatedRecording> recs{render(latency_scene(3, 4))};
  auto p = PipelineParams::best();
  p.framing.frame_size_s = 0.35;
  const auto st = latency_experiment(recs, p, HeadModel{}, 2);
  CHECK(st.events == 8);
  CHECK(st.latencies_s.size() + st.dropped == st.events);
  for (double l : st.latencies_s) CHECK(l >= 0.35);
  CHECK(st.mean_s >= 0.35);
}
