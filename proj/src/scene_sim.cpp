#include "doalab/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>

#include "doalab/errors.hpp"
#include "fft_backend.hpp"

namespace doalab {
namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::vector<double> white_noise(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = gauss(rng);
  return out;
}

/// Zeroes every bin outside [lo_hz, hi_hz] and tilts the rest by `slope_db_per_octave` above lo_hz.
std::vector<double> band_limit(std::span<const double> x, double fs, double lo_hz, double hi_hz,
                               double slope_db_per_octave = 0.0) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> spec(n / 2 + 1);
  detail::rfft(x, spec);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (f < lo_hz || f > hi_hz) {
      spec[k] = 0.0;
    } else if (slope_db_per_octave != 0.0) {
      spec[k] *= std::pow(10.0, slope_db_per_octave * std::log2(f / lo_hz) / 20.0);
    }
  }
  std::vector<double> out(n);
  detail::irfft(spec, out);
  for (auto& v : out) v /= static_cast<double>(n);
  return out;
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double track_angle(const std::vector<AngleKnot>& track, double t) {
  if (t <= track.front().t_s) return track.front().theta_rad;
  if (t >= track.back().t_s) return track.back().theta_rad;
  auto it = std::upper_bound(track.begin(), track.end(), t,
                             [](double v, const AngleKnot& k) { return v < k.t_s; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double w = (t - a.t_s) / (b.t_s - a.t_s);
  return a.theta_rad + w * (b.theta_rad - a.theta_rad);
}

/// 1 inside the intervals with 10 ms raised-cosine edges, 0 elsewhere.
std::vector<double> speech_gate(const std::vector<Interval>& intervals, std::size_t n, double fs) {
  std::vector<double> gate(n, 0.0);
  const double ramp = 0.01;
  for (const auto& iv : intervals) {
    const auto a = static_cast<std::size_t>(std::max(0.0, std::ceil(iv.start_s * fs)));
    const auto b = std::min(n, static_cast<std::size_t>(std::floor(iv.end_s * fs)));
    for (std::size_t i = a; i < b; ++i) {
      const double t = static_cast<double>(i) / fs;
      const double edge = std::min(t - iv.start_s, iv.end_s - t);
      gate[i] = edge >= ramp ? 1.0 : 0.5 - 0.5 * std::cos(kPi * std::max(0.0, edge) / ramp);
    }
  }
  return gate;
}

void check(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(std::string("scene: ") + what);
}

json knots_to_json(const std::vector<AngleKnot>& track) {
  json a = json::array();
  for (const auto& k : track) a.push_back({k.t_s, k.theta_rad});
  return a;
}

}  // namespace

void SceneSpec::validate() const {
  check(std::isfinite(duration_s) && duration_s > 0.0, "duration must be positive");
  check(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0, "sample rate must be positive");
  check(weight >= 1, "weight must be >= 1");
  check(noise_rms >= 0.0 && std::isfinite(noise_rms), "noise_rms must be >= 0");
  check(speech_level >= 0.0 && std::isfinite(speech_level), "speech_level must be >= 0");
  check(modulation_depth >= 0.0 && modulation_depth <= 1.0, "modulation_depth must lie in [0, 1]");
  double prev_end = 0.0;
  for (const auto& iv : speech_intervals) {
    check(iv.start_s >= prev_end && iv.start_s < iv.end_s && iv.end_s <= duration_s,
          "speech intervals must be sorted, disjoint and inside the duration");
    prev_end = iv.end_s;
  }
  check(!speech_intervals.empty() ? !talker_track.empty() : true, "speech needs a talker track");
  for (std::size_t i = 0; i < talker_track.size(); ++i) {
    const auto& k = talker_track[i];
    check(k.t_s >= 0.0 && k.t_s <= duration_s, "track knot outside the duration");
    check(std::abs(k.theta_rad) <= kPi / 2, "track azimuth outside [-pi/2, pi/2]");
    check(i == 0 || k.t_s > talker_track[i - 1].t_s, "track knots must have increasing times");
  }
  for (const auto& e : echoes) {
    check(e.gain >= 0.0 && e.gain < 1.0, "echo gain must lie in [0, 1)");
    check(e.extra_delay_s >= 0.0 && e.extra_delay_s < 0.5, "echo delay must lie in [0, 0.5) s");
    check(std::abs(e.azimuth_rad) <= kPi / 2, "echo azimuth outside [-pi/2, pi/2]");
  }
  for (const auto& d : distractors) {
    check(d.time_s >= 0.0 && d.time_s < duration_s, "distractor outside the duration");
    check(d.level >= 0.0 && std::isfinite(d.level), "distractor level must be >= 0");
  }
}

json to_json(const SceneSpec& s) {
  json intervals = json::array();
  for (const auto& iv : s.speech_intervals) intervals.push_back({iv.start_s, iv.end_s});
  json echoes = json::array();
  for (const auto& e : s.echoes) echoes.push_back({e.extra_delay_s, e.gain, e.azimuth_rad});
  json distractors = json::array();
  for (const auto& d : s.distractors) {
    distractors.push_back({d.time_s, d.kind == DistractorKind::Click ? "click" : "burst", d.level});
  }
  return json{{"label", s.label},
              {"weight", s.weight},
              {"duration_s", s.duration_s},
              {"sample_rate_hz", s.sample_rate_hz},
              {"talker_track", knots_to_json(s.talker_track)},
              {"speech_intervals", intervals},
              {"echoes", echoes},
              {"noise_rms", s.noise_rms},
              {"distractors", distractors},
              {"robot_noise", s.robot_noise},
              {"seed", s.seed},
              {"speech_level", s.speech_level},
              {"modulation_depth", s.modulation_depth}};
}

SceneSpec scene_from_json(const json& j) {
  try {
    SceneSpec s;
    s.label = j.value("label", std::string{});
    s.weight = j.value("weight", 1);
    s.duration_s = j.at("duration_s").get<double>();
    s.sample_rate_hz = j.value("sample_rate_hz", kDefaultSampleRate);
    for (const auto& k : j.value("talker_track", json::array())) {
      s.talker_track.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
    }
    for (const auto& iv : j.value("speech_intervals", json::array())) {
      s.speech_intervals.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
    }
    for (const auto& e : j.value("echoes", json::array())) {
      s.echoes.push_back({e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()});
    }
    s.noise_rms = j.value("noise_rms", 0.005);
    for (const auto& d : j.value("distractors", json::array())) {
      const auto kind = d.at(1).get<std::string>();
      check(kind == "click" || kind == "burst", "distractor kind must be click or burst");
      s.distractors.push_back({d.at(0).get<double>(),
                               kind == "click" ? DistractorKind::Click : DistractorKind::Burst,
                               d.at(2).get<double>()});
    }
    s.robot_noise = j.value("robot_noise", false);
    s.seed = j.value("seed", std::uint64_t{0});
    s.speech_level = j.value("speech_level", 0.25);
    s.modulation_depth = j.value("modulation_depth", 1.0);
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad scene JSON: ") + e.what());
  }
}

MonoSignal synth_speech_like(double duration_s, double sample_rate, std::uint64_t seed,
                             double modulation_depth) {
  if (!(duration_s >= 0.5)) throw InvalidArgument("synth_speech_like: duration must be >= 0.5 s");
  if (!(sample_rate > 6800.0)) throw InvalidArgument("synth_speech_like: sample rate must exceed 6.8 kHz");
  if (!(modulation_depth >= 0.0 && modulation_depth <= 1.0)) {
    throw InvalidArgument("synth_speech_like: depth must lie in [0, 1]");
  }
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  auto rng = stream_rng(seed, 1);
  const auto noise = white_noise(n, rng);
  // Long-term speech spectra fall off above a few hundred Hz.
  auto carrier = band_limit(noise, sample_rate, 300.0, 3400.0, -6.0);

  // A syllable-rate component and a weaker faster one, both kept inside the numerator bands.
  constexpr int kComponents = 2;
  const double lo[kComponents] = {5.0, 8.0};
  const double hi[kComponents] = {8.0, 13.0};
  const double m[kComponents] = {0.75 * modulation_depth, 0.25 * modulation_depth};
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  double f[kComponents];
  double phi[kComponents];
  for (int k = 0; k < kComponents; ++k) {
    f[k] = std::uniform_real_distribution<double>(lo[k], hi[k])(rng);
    phi[k] = phase(rng);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    double a = 1.0;
    for (int k = 0; k < kComponents; ++k) a += m[k] * std::sin(2.0 * kPi * f[k] * t + phi[k]);
    carrier[i] *= a;
  }
  const double r = rms(carrier);
  if (r > 0.0) {
    for (auto& v : carrier) v /= r;
  }
  return MonoSignal(std::move(carrier), sample_rate);
}

StereoSignal binauralize(const MonoSignal& source, const std::vector<AngleKnot>& track,
                         const HeadModel& model, double common_delay_s) {
  if (track.empty()) throw InvalidArgument("binauralize: empty track");
  const double fs = source.sample_rate();
  const double duration = source.duration_s();
  for (const auto& k : track) {
    if (k.t_s < 0.0 || k.t_s > duration) throw InvalidArgument("binauralize: track time outside the signal");
    (void)AzimuthRad(k.theta_rad);
  }
  if (!(common_delay_s >= 0.0)) throw InvalidArgument("binauralize: negative common delay");

  const std::size_t n = source.size();
  const auto hop = static_cast<std::size_t>(std::max<long long>(1, std::llround(0.05 * fs)));
  const std::size_t win = 2 * hop;
  const double max_shift = common_delay_s * fs + model.max_itd_s() * fs;
  const auto pad = static_cast<std::size_t>(std::ceil(max_shift)) + 32;
  const std::size_t m = detail::fast_length(win + 2 * pad);

  std::vector<double> window(win);
  for (std::size_t i = 0; i < win; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(win));
  }

  std::vector<double> left(n, 0.0), right(n, 0.0);
  std::vector<double> block(m), shifted(m);
  std::vector<std::complex<double>> spec(m / 2 + 1), rot(m / 2 + 1);
  const auto x = source.samples();

  // Blocks start one hop before the signal so every sample is covered by two windows.
  for (long long start = -static_cast<long long>(hop); start < static_cast<long long>(n);
       start += static_cast<long long>(hop)) {
    std::fill(block.begin(), block.end(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < win; ++i) {
      const long long idx = start + static_cast<long long>(i);
      if (idx < 0 || idx >= static_cast<long long>(n)) continue;
      block[pad + i] = x[static_cast<std::size_t>(idx)] * window[i];
      any = any || block[pad + i] != 0.0;
    }
    if (!any) continue;
    detail::rfft(block, spec);

    const double center_s = (static_cast<double>(start) + static_cast<double>(hop)) / fs;
    const double tau = itd_woodworth(AzimuthRad(track_angle(track, center_s)), model);
    const double delays[2] = {(common_delay_s - tau / 2.0) * fs, (common_delay_s + tau / 2.0) * fs};
    std::vector<double>* outs[2] = {&left, &right};
    for (int ch = 0; ch < 2; ++ch) {
      for (std::size_t k = 0; k < spec.size(); ++k) {
        const double ang = -2.0 * kPi * static_cast<double>(k) * delays[ch] / static_cast<double>(m);
        rot[k] = spec[k] * std::polar(1.0, ang);
      }
      if (m % 2 == 0) rot.back() = std::complex<double>(rot.back().real(), 0.0);
      detail::irfft(rot, shifted);
      auto& out = *outs[ch];
      for (std::size_t j = 0; j < m; ++j) {
        const long long idx = start - static_cast<long long>(pad) + static_cast<long long>(j);
        if (idx < 0 || idx >= static_cast<long long>(n)) continue;
        out[static_cast<std::size_t>(idx)] += shifted[j] / static_cast<double>(m);
      }
    }
  }
  return StereoSignal(MonoSignal(std::move(left), fs), MonoSignal(std::move(right), fs));
}

AnnotatedRecording render(const SceneSpec& spec, const HeadModel& model) {
  spec.validate();
  const double fs = spec.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * fs));
  std::vector<double> left(n, 0.0), right(n, 0.0);

  std::vector<AngleKnot> track = spec.talker_track;
  if (track.empty()) track.push_back({0.0, 0.0});

  if (!spec.speech_intervals.empty() && spec.speech_level > 0.0) {
    const auto dry = synth_speech_like(std::max(spec.duration_s, 0.5), fs, spec.seed, spec.modulation_depth);
    const auto gate = speech_gate(spec.speech_intervals, n, fs);
    std::vector<double> talker(n);
    for (std::size_t i = 0; i < n; ++i) talker[i] = dry[i] * gate[i] * spec.speech_level;
    const MonoSignal src(std::move(talker), fs);

    auto mix = [&](const StereoSignal& s, double gain) {
      for (std::size_t i = 0; i < n; ++i) {
        left[i] += gain * s.left()[i];
        right[i] += gain * s.right()[i];
      }
    };
    mix(binauralize(src, track, model), 1.0);
    for (const auto& e : spec.echoes) {
      if (e.gain == 0.0) continue;
      const std::vector<AngleKnot> fixed{{0.0, e.azimuth_rad}};
      mix(binauralize(src, fixed, model, e.extra_delay_s), e.gain);
    }
  }

  // Everything below is diotic (no interaural delay).
  std::vector<double> diotic(n, 0.0);
  for (std::size_t d = 0; d < spec.distractors.size(); ++d) {
    const auto& dist = spec.distractors[d];
    const auto at = static_cast<std::size_t>(std::llround(dist.time_s * fs));
    if (dist.kind == DistractorKind::Click) {
      const auto len = static_cast<std::size_t>(std::max<long long>(1, std::llround(0.002 * fs)));
      for (std::size_t i = at; i < std::min(n, at + len); ++i) diotic[i] += dist.level;
    } else {
      auto rng = stream_rng(spec.seed, 100 + d);
      const auto len = static_cast<std::size_t>(std::llround(0.05 * fs));
      const auto burst = white_noise(len, rng);
      for (std::size_t i = 0; i < len && at + i < n; ++i) diotic[at + i] += dist.level * burst[i];
    }
  }
  if (spec.robot_noise && n > 0) {
    auto rng = stream_rng(spec.seed, 2);
    auto hum = band_limit(white_noise(n, rng), fs, 50.0, 500.0);
    const double r = rms(hum);
    for (std::size_t i = 0; i < n; ++i) diotic[i] += (r > 0.0 ? 0.08 * hum[i] / r : 0.0);
    // Servo-like 0.2 s linear chirps (300 -> 1200 Hz) every 2 s.
    const double chirp_len = 0.2;
    for (double t0 = 1.0; t0 + chirp_len <= spec.duration_s; t0 += 2.0) {
      const auto a = static_cast<std::size_t>(std::llround(t0 * fs));
      const auto len = static_cast<std::size_t>(std::llround(chirp_len * fs));
      for (std::size_t i = 0; i < len && a + i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double phase = 2.0 * kPi * (300.0 * t + 0.5 * (900.0 / chirp_len) * t * t);
        const double env = 0.5 - 0.5 * std::cos(2.0 * kPi * t / chirp_len);
        diotic[a + i] += 0.08 * env * std::sin(phase);
      }
    }
  }
  auto noise_rng = stream_rng(spec.seed, 3);
  std::normal_distribution<double> gauss(0.0, spec.noise_rms > 0.0 ? spec.noise_rms : 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    left[i] += diotic[i];
    right[i] += diotic[i];
    if (spec.noise_rms > 0.0) {
      left[i] += gauss(noise_rng);
      right[i] += gauss(noise_rng);
    }
  }

  AnnotatedRecording rec;
  rec.audio = StereoSignal(MonoSignal(std::move(left), fs), MonoSignal(std::move(right), fs));
  rec.speech_intervals = spec.speech_intervals;
  rec.angle_track = track;
  rec.weight = spec.weight;
  rec.label = spec.label;
  rec.validate();
  return rec;
}

namespace {

constexpr double kDeg = kPi / 180.0;

/// Utterances of 1.2-2.0 s separated by 0.6-1.0 s pauses.
std::vector<Interval> utterances(double duration, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lead(0.3, 0.7), len(1.2, 2.0), gap(0.6, 1.0);
  std::vector<Interval> out;
  double t = lead(rng);
  while (true) {
    const double e = t + len(rng);
    if (e > duration - 0.2) break;
    out.push_back({t, e});
    t = e + gap(rng);
  }
  return out;
}

enum class Sounds { SpeechOnly, NonSpeechInPauses, NonSpeechDuringSpeech, Robot };

SceneSpec row(std::string label, int weight, bool mobile, Sounds sounds, double azimuth_deg,
              double echo_gain, std::uint64_t seed) {
  auto rng = stream_rng(seed, 7);
  SceneSpec s;
  s.label = std::move(label);
  s.weight = weight;
  s.duration_s = 6.0;
  s.seed = seed;
  s.speech_intervals = utterances(s.duration_s, rng);
  if (mobile) {
    const double from = azimuth_deg >= 0 ? -60.0 : 60.0;
    s.talker_track = {{0.0, from * kDeg}, {s.duration_s, -from * kDeg}};
  } else {
    s.talker_track = {{0.0, azimuth_deg * kDeg}};
  }
  if (echo_gain > 0.0) {
    // Six image sources: the first inside the correlation window, later ones decaying.
    std::uniform_real_distribution<double> az(-80.0, 80.0);
    double delay = 0.0;
    double gain = echo_gain;
    for (int k = 0; k < 6; ++k) {
      delay += std::uniform_real_distribution<double>(0.0003, 0.0012)(rng);
      s.echoes.push_back({delay, gain, az(rng) * kDeg});
      gain *= 0.85;
    }
  }
  s.noise_rms = echo_gain > 0.0 ? 0.02 : 0.01;
  auto add = [&](double t, bool click) {
    s.distractors.push_back({t, click ? DistractorKind::Click : DistractorKind::Burst, click ? 0.3 : 0.1});
  };
  switch (sounds) {
    case Sounds::SpeechOnly: break;
    case Sounds::NonSpeechInPauses: {
      double prev = 0.0;
      for (std::size_t i = 0; i < s.speech_intervals.size(); ++i) {
        const auto& iv = s.speech_intervals[i];
        add(0.5 * (prev + iv.start_s), i % 2 == 0);
        prev = iv.end_s;
      }
      if (s.duration_s - prev > 0.2) add(0.5 * (prev + s.duration_s), true);
      break;
    }
    case Sounds::NonSpeechDuringSpeech:
      for (std::size_t i = 0; i < s.speech_intervals.size(); ++i) {
        const auto& iv = s.speech_intervals[i];
        add(iv.start_s + 0.4 * (iv.end_s - iv.start_s), i % 2 == 0);
        add(iv.start_s + 0.8 * (iv.end_s - iv.start_s), i % 2 != 0);
      }
      break;
    case Sounds::Robot: s.robot_noise = true; break;
  }
  return s;
}

}  // namespace

SceneSuite default_suite(std::uint64_t seed) {
  auto sub = [seed](std::uint64_t k) { return seed * 1000003ULL + k; };
  SceneSuite suite;
  suite.train = {
      row("rec01_static_speech", 1, false, Sounds::SpeechOnly, 30.0, 0.0, sub(1)),
      row("rec02_mobile_speech", 1, true, Sounds::SpeechOnly, 1.0, 0.3, sub(2)),
      row("rec03_static_speech_nonspeech", 2, false, Sounds::NonSpeechInPauses, -40.0, 0.4, sub(3)),
      row("rec04_static_simultaneous_nonspeech", 2, false, Sounds::NonSpeechDuringSpeech, 50.0, 0.4, sub(4)),
      row("rec05_static_robot_speech", 3, false, Sounds::Robot, -20.0, 0.5, sub(5)),
      row("rec06_mobile_speech_nonspeech", 2, true, Sounds::NonSpeechInPauses, -1.0, 0.4, sub(6)),
      row("rec07_mobile_speech", 1, true, Sounds::SpeechOnly, 1.0, 0.3, sub(7)),
      row("rec08_static_speech_nonspeech", 3, false, Sounds::NonSpeechInPauses, 15.0, 0.6, sub(8)),
  };
  suite.test = {
      row("rec09_mobile_robot_speech", 1, true, Sounds::Robot, 1.0, 0.5, sub(9)),
      row("rec10_static_robot_speech", 1, false, Sounds::Robot, -35.0, 0.5, sub(10)),
      row("rec11_mobile_speech", 1, true, Sounds::SpeechOnly, -1.0, 0.3, sub(11)),
  };
  return suite;
}

SceneSpec latency_scene(std::uint64_t seed, std::size_t n_onsets, double azimuth_rad) {
  auto rng = stream_rng(seed, 11);
  std::uniform_real_distribution<double> jitter(0.0, 0.5);
  SceneSpec s;
  s.label = "latency";
  s.seed = seed;
  s.talker_track = {{0.0, azimuth_rad}};
  const double spacing = 3.0;
  for (std::size_t k = 0; k < n_onsets; ++k) {
    const double on = 0.7 + spacing * static_cast<double>(k) + jitter(rng);
    s.speech_intervals.push_back({on, on + 1.5});
  }
  s.duration_s = 0.7 + spacing * static_cast<double>(n_onsets) + 0.5;
  s.noise_rms = 0.003;
  s.validate();
  return s;
}

SceneSpec echo_scene(std::uint64_t seed, double echo_gain, double echo_azimuth_rad) {
  auto rng = stream_rng(seed, 13);
  std::uniform_real_distribution<double> az(-45.0, 45.0), delay(0.0003, 0.0015);
  SceneSpec s;
  s.label = "echo";
  s.seed = seed;
  s.duration_s = 4.0;
  s.speech_intervals = {{0.5, 3.5}};
  s.talker_track = {{0.0, az(rng) * kDeg}};
  s.echoes.push_back({delay(rng), echo_gain, echo_azimuth_rad});
  s.noise_rms = 0.02;
  s.validate();
  return s;
}

}  // namespace doalab
