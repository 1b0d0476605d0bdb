#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "doalab/annotation_io.hpp"
#include "doalab/errors.hpp"
#include "doalab/wav.hpp"

using namespace doalab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("doalab_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

io::Annotation sample_annotation() {
  io::Annotation a;
  a.label = "rec03";
  a.weight = 2;
  a.speech_intervals = {{0.5, 1.25}, {2.0, 3.1}};
  a.angle_track = {{0.0, 0.3}, {4.0, -0.2}};
  return a;
}

}  // namespace

TEST_CASE("annotation round trip") {
  const auto dir = scratch_dir("annotation");
  const auto a = sample_annotation();
  io::write_annotation(dir / "a.json", a);
  const auto b = io::read_annotation(dir / "a.json");
  CHECK(b.label == a.label);
  CHECK(b.weight == 2);
  REQUIRE(b.speech_intervals.size() == 2);
  CHECK(b.speech_intervals[1].end_s == 3.1);
  CHECK(b.angle_track[1].theta_rad == -0.2);
  CHECK_THROWS_AS((void)io::read_annotation(dir / "missing.json"), InvalidArgument);
  CHECK_THROWS_AS((void)io::annotation_from_json(nlohmann::json{{"label", "x"}}), InvalidArgument);
  fs::remove_all(dir);
}

TEST_CASE("manifest round trip and dataset loading") {
  const auto dir = scratch_dir("manifest");
  std::vector<double> x(1600);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.01 * double(i));
  wav::write(dir / "r.wav", StereoSignal(MonoSignal(x, 16000), MonoSignal(x, 16000)));
  io::write_annotation(dir / "r.json", sample_annotation());
  io::write_manifest(dir / "manifest.json", {{"r1", "train", 2, "r.wav", "r.json"},
                                              {"r2", "test", 1, "r.wav", "r.json"}});
  const auto entries = io::read_manifest(dir / "manifest.json");
  REQUIRE(entries.size() == 2);
  CHECK(entries[1].split == "test");
  CHECK(io::load_dataset(dir / "manifest.json").size() == 2);
  const auto train = io::load_dataset(dir / "manifest.json", "train");
  REQUIRE(train.size() == 1);
  CHECK(train[0].weight == 2);
  CHECK(train[0].audio.size() == 1600);
  fs::remove_all(dir);
}

TEST_CASE("estimates csv round trip") {
  std::vector<DoaEstimate> est(3);
  est[0].frame_start_s = 0.0;
  est[0].classifier_value = std::numeric_limits<double>::quiet_NaN();
  est[1].frame_start_s = 0.17;
  est[1].accepted = true;
  est[1].classifier_value = 2.5;
  est[1].angle = AzimuthRad(0.4);
  est[1].lag_seconds = 1.25e-4;
  est[2].frame_start_s = 0.34;
  est[2].classifier_value = 9.0;
  for (bool degrees : {false, true}) {
    std::stringstream io;
    io::write_estimates_csv(io, est, degrees);
    const auto header = io.str().substr(0, io.str().find('\n'));
    CHECK(header.find(degrees ? "angle_deg" : "angle_rad") != std::string::npos);
    CHECK(header.find("emit_wallclock_s") != std::string::npos);
    const auto back = io::read_estimates_csv(io, 0.34);
    REQUIRE(back.size() == 3);
    CHECK(std::isnan(back[0].classifier_value));
    CHECK(back[1].accepted);
    CHECK(back[1].angle->value() == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(back[1].lag_seconds == 1.25e-4);
    CHECK(back[1].frame_size_s == 0.34);
    CHECK_FALSE(back[2].angle.has_value());
  }
}

TEST_CASE("metrics json and number formatting") {
  Metrics m;
  m.f1 = 0.75;
  m.mse = 0.01;
  m.no_speech_windows = false;
  const auto back = io::metrics_from_json(io::to_json(m));
  CHECK(back.f1 == 0.75);
  CHECK(back.mse == 0.01);
  CHECK_FALSE(back.no_speech_windows);
  for (double v : {0.1, 1.0 / 3.0, 1e-17, 123456.789}) CHECK(std::stod(io::format_double(v)) == v);
}
