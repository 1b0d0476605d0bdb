#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "doalab/errors.hpp"
#include "doalab/frame_classify.hpp"
#include "doalab/scene_sim.hpp"

using namespace doalab;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> modulated_noise(double seconds, double fs, double mod_hz, double depth, std::uint64_t seed,
                                    double smear = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> x(static_cast<std::size_t>(seconds * fs));
  std::uniform_real_distribution<double> ph(0, 2 * kPi);
  std::vector<double> phases(20);
  for (auto& p : phases) p = ph(rng);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = double(i) / fs;
    double env = 1 + depth * std::sin(2 * kPi * mod_hz * t);
    // Dense 40-100 Hz envelope fluctuation stands in for reverberant smearing.
    for (int k = 0; k < 20 && smear > 0; ++k) env += smear / 20 * std::sin(2 * kPi * (40 + 3 * k) * t + phases[k]);
    x[i] = env * d(rng);
  }
  return x;
}

}  // namespace

TEST_CASE("classifier names and thresholds") {
  CHECK(parse_classifier("po") == ClassifierKind::PowerOnset);
  CHECK(parse_classifier("power-onset") == ClassifierKind::PowerOnset);
  CHECK(parse_classifier("srmr") == ClassifierKind::Srmr);
  CHECK_THROWS_AS((void)parse_classifier("vad"), InvalidArgument);
  CHECK_THROWS_AS(Thresholds(0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(Thresholds(3.0, 3.0), InvalidArgument);
  CHECK_THROWS_AS(Thresholds(3.0, 2.0), InvalidArgument);
}

TEST_CASE("classify examples") {
  const Thresholds t(1.5, 7);
  CHECK(classify(4.0, t));
  CHECK_FALSE(classify(1.5, t));
  CHECK_FALSE(classify(7.0, t));
  CHECK_FALSE(classify(1e10, t));
  CHECK_FALSE(classify(NAN, t));
}

TEST_CASE("filterbank layout") {
  const auto bank = ModulationFilterbank::standard();
  const std::array<double, 8> centers{4, 6.5, 10.7, 17.6, 28.9, 47.5, 78.1, 128};
  for (std::size_t i = 0; i < 8; ++i) CHECK(bank.band_centers_hz[i] == Approx(centers[i]));
  for (std::size_t i = 1; i < 8; ++i) {
    CHECK(bank.band_edges_hz[i] == Approx(std::sqrt(centers[i - 1] * centers[i])));
  }
  for (std::size_t i = 1; i < 9; ++i) CHECK(bank.band_edges_hz[i] > bank.band_edges_hz[i - 1]);
}

TEST_CASE("power onset examples") {
  const std::vector<double> a(100, 0.3), two_a(100, 0.6), zeros(100, 0.0), ones(100, 1.0);
  CHECK(power_onset_ratio(two_a, a) == Approx(4.0));
  CHECK(power_onset_ratio(a, a) == Approx(1.0));
  CHECK(power_onset_ratio(ones, zeros) == Approx(1e10));
  ClassifierOptions whole;
  whole.whole_frame_power_ratio = true;
  CHECK(power_onset_ratio(two_a, a, whole) == Approx(4.0));
  CHECK_THROWS_AS((void)power_onset_ratio(a, std::vector<double>(50, 1.0)), InvalidArgument);
}

TEST_CASE("srmr separates modulated speech-rate noise from tones and smearing") {
  const double fs = 16000;
  const auto bank = ModulationFilterbank::standard();
  const auto clean = modulated_noise(1.0, fs, 8, 0.9, 1);
  const double clean_ratio = srmr(clean, fs, bank).ratio;
  CHECK(clean_ratio > 1.5);

  std::vector<double> tone(16000);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = std::sin(2 * kPi * 1000 * double(i) / fs);
  const auto t = srmr(tone, fs, bank);
  CHECK(t.ratio == Approx(1.0).epsilon(0.05));
  CHECK_FALSE(classify(t.ratio, Thresholds(1.5, 7)));

  const auto smeared = modulated_noise(1.0, fs, 8, 0.9, 1, 1.5);
  CHECK(srmr(smeared, fs, bank).ratio < clean_ratio);

  const auto speech = synth_speech_like(1.0, fs, 3);
  CHECK(srmr(speech.samples(), fs, bank).ratio > 1.5);
}

TEST_CASE("srmr low-confidence flag and band split toggle") {
  const double fs = 16000;
  const auto bank = ModulationFilterbank::standard();
  const auto x = modulated_noise(0.5, fs, 8, 0.9, 2);
  CHECK(srmr(std::span(x).first(3200), fs, bank).low_confidence);  // 0.2 s < 0.25 s
  CHECK_FALSE(srmr(x, fs, bank).low_confidence);

  // Oracle for both variants straight from the band energies of the DC-removed envelope.
  auto env = analytic_envelope(x);
  double mean = 0;
  for (double v : env) mean += v;
  mean /= double(env.size());
  for (auto& v : env) v -= mean;
  const auto e = bank.band_energies(env, fs);
  const double eps = 1e-10;
  const double verbatim = (e[0] + e[1] + e[2] + e[3] + eps) / (e[3] + e[4] + e[5] + e[6] + e[7] + eps);
  const double split = (e[0] + e[1] + e[2] + e[3] + eps) / (e[4] + e[5] + e[6] + e[7] + eps);
  CHECK(srmr(x, fs, bank).ratio == Approx(verbatim).epsilon(1e-9));
  ClassifierOptions opt;
  opt.srmr_overlapping_band = false;
  CHECK(srmr(x, fs, bank, opt).ratio == Approx(split).epsilon(1e-9));
}

TEST_CASE("band energies match a direct DFT") {
  const double fs = 1000;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d;
  std::vector<double> env(500);
  for (auto& v : env) v = d(rng);
  const auto bank = ModulationFilterbank::standard();
  std::array<double, 8> expected{};
  const std::size_t n = env.size();
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double f = double(k) * fs / double(n);
    for (std::size_t j = 0; j < 8; ++j) {
      if (f >= bank.band_edges_hz[j] && f < bank.band_edges_hz[j + 1]) {
        std::complex<double> acc = 0;
        for (std::size_t i = 0; i < n; ++i) acc += env[i] * std::polar(1.0, -2 * kPi * double(k * i) / double(n));
        expected[j] += std::norm(acc);
      }
    }
  }
  const auto got = bank.band_energies(env, fs);
  for (std::size_t j = 0; j < 8; ++j) CHECK(got[j] == Approx(expected[j]).epsilon(1e-9));
}
