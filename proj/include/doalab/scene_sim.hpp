#pragma once

// Synthetic binaural scenes with known ground truth: a speech-like modulated noise talker moved
// along an azimuth track, discrete image-source echoes, diotic distractors, robot-like noise and
// sensor noise.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "doalab/head_geometry.hpp"
#include "doalab/pipeline.hpp"
#include "doalab/signal.hpp"

namespace doalab {

struct Echo {
  double extra_delay_s = 0.005;
  double gain = 0.5;  ///< [0, 1)
  double azimuth_rad = 0.0;
};

enum class DistractorKind { Click, Burst };

struct Distractor {
  double time_s = 0.0;
  DistractorKind kind = DistractorKind::Click;
  double level = 0.5;  ///< peak amplitude of a click, RMS of a burst
};

struct SceneSpec {
  std::string label;
  int weight = 1;
  double duration_s = 6.0;
  double sample_rate_hz = kDefaultSampleRate;
  std::vector<AngleKnot> talker_track;
  std::vector<Interval> speech_intervals;
  std::vector<Echo> echoes;
  double noise_rms = 0.005;
  std::vector<Distractor> distractors;
  bool robot_noise = false;
  std::uint64_t seed = 0;
  double speech_level = 0.25;      ///< RMS of the dry talker inside speech intervals
  double modulation_depth = 1.0;   ///< passed to synth_speech_like

  /// Throws InvalidArgument on any violated invariant (see field comments and the track rules:
  /// increasing knot times inside [0, duration], azimuths inside [-pi/2, pi/2]).
  void validate() const;
};

[[nodiscard]] nlohmann::json to_json(const SceneSpec& spec);
[[nodiscard]] SceneSpec scene_from_json(const nlohmann::json& j);

/// 300-3400 Hz noise carrier (falling 6 dB per octave) times (1 + sum_k m_k sin(2 pi f_k t + phi_k)) with two components:
/// f_1 in [5, 8] Hz at depth 0.75 and f_2 in [8, 13] Hz at depth 0.25 (both scaled by
/// `modulation_depth`), normalized to unit RMS. Requires duration >= 0.5 s and depth in [0, 1].
[[nodiscard]] MonoSignal synth_speech_like(double duration_s, double sample_rate, std::uint64_t seed,
                                           double modulation_depth = 1.0);

/// ITD-only rendering: each 50 ms block is delayed by common_delay -+ tau(theta)/2 on the left and
/// right channel with a spectral phase ramp (theta interpolated at block centers) and the blocks
/// are Hann overlap-added. Throws InvalidArgument when a knot lies outside the signal.
[[nodiscard]] StereoSignal binauralize(const MonoSignal& source, const std::vector<AngleKnot>& track,
                                       const HeadModel& model, double common_delay_s = 0.0);

[[nodiscard]] AnnotatedRecording render(const SceneSpec& spec, const HeadModel& model = {});

struct SceneSuite {
  std::vector<SceneSpec> train;  ///< eight recordings, weights 1,1,2,2,3,2,1,3
  std::vector<SceneSpec> test;   ///< three recordings
};

/// Mirrors the eight training and three test recording conditions (stationary vs mobile talker,
/// non-speech sounds, simultaneous robot noise).
[[nodiscard]] SceneSuite default_suite(std::uint64_t seed);

/// Static talker with `n_onsets` well-separated utterances, for latency measurements.
[[nodiscard]] SceneSpec latency_scene(std::uint64_t seed, std::size_t n_onsets = 10,
                                      double azimuth_rad = 0.5);

/// A single static talker with one echo, as used for the weighting comparison.
[[nodiscard]] SceneSpec echo_scene(std::uint64_t seed, double echo_gain, double echo_azimuth_rad);

}  // namespace doalab
