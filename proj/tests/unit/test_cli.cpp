#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "../../tools/cli.hpp"
#include "doalab/param_opt.hpp"
#include "doalab/scene_sim.hpp"

using namespace doalab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
  fs::path path;
  explicit Scratch(const std::string& name) : path(fs::temp_directory_path() / ("doalab_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  [[nodiscard]] std::string operator/(const std::string& f) const { return (path / f).string(); }
};

int run(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "doalab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli::run(int(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  return code;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

// Two short scenes written through `simulate --spec`.
void small_dataset(const Scratch& dir) {
  json scenes = json::array();
  for (int i = 0; i < 2; ++i) {
    SceneSpec s;
    s.label = "s" + std::to_string(i);
    s.duration_s = 2.0;
    s.talker_track = {{0.0, 0.4 - 0.8 * i}};
    s.speech_intervals = {{0.4, 1.6}};
    s.seed = 20 + i;
    scenes.push_back(to_json(s));
  }
  write_text(dir / "spec.json", json{{"scenes", scenes}}.dump());
  REQUIRE(run({"simulate", "--spec", dir / "spec.json", "--out", dir / "data"}) == 0);
}

}  // namespace

TEST_CASE("simulate writes the default suite") {
  Scratch dir("suite");
  REQUIRE(run({"simulate", "--seed", "0", "--out", dir / "d"}) == 0);
  int wavs = 0, jsons = 0;
  for (const auto& e : fs::directory_iterator(dir.path / "d")) {
    if (e.path().extension() == ".wav") ++wavs;
    if (e.path().extension() == ".json" && e.path().filename() != "manifest.json") ++jsons;
  }
  CHECK(wavs == 11);
  CHECK(jsons == 11);
  const auto manifest = read_json(dir / "d/manifest.json");
  CHECK(manifest.dump().find("\"test\"") != std::string::npos);
}

TEST_CASE("estimate, evaluate and optimize on a small dataset") {
  Scratch dir("pipeline");
  small_dataset(dir);
  REQUIRE(run({"estimate", "--wav", dir / "data/s0.wav", "--out", dir / "est.csv"}) == 0);
  REQUIRE(run({"evaluate", "--estimates", dir / "est.csv", "--annotation", dir / "data/s0.json",
               "--out", dir / "m.json"}) == 0);
  const auto m = read_json(dir / "m.json");
  CHECK(m.at("f1").get<double>() > 0.0);

  SUBCASE("a 2x2x2 grid gives eight trials") {
    write_text(dir / "space.json", R"({"classifier":["srmr","po"],"timing":["phat","scot"],
      "frame_size":{"grid":[0.2,0.3,0.1]},"step_fraction":{"grid":[0.5,0.5,0.1]},
      "delta_low":{"grid":[1.5,1.5,1]},"delta_high":{"grid":[7,7,1]}})");
    REQUIRE(run({"optimize", "--manifest", dir / "data/manifest.json", "--space", dir / "space.json",
                 "--method", "grid", "--objective", "joint", "--out", dir / "opt"}) == 0);
    std::ifstream in(dir / "opt/trials.jsonl");
    CHECK(read_trials_jsonl(in).size() == 8);
    const auto best = read_json(dir / "opt/best.json");
    CHECK(best.at("method") == "grid");
    CHECK(best.contains("best"));
    REQUIRE(run({"contour", "--trials", dir / "opt/trials.jsonl", "--out", dir / "c.csv"}) == 0);
  }
  SUBCASE("a single frame size has no t-test") {
    REQUIRE(run({"latency", "--manifest", dir / "data/manifest.json", "--frame-sizes", "0.35",
                 "--repeats", "1", "--out", dir / "lat.json"}) == 0);
    const auto lat = read_json(dir / "lat.json");
    CHECK(lat.at("groups").size() == 1);
    CHECK_FALSE(lat.contains("t_test"));
  }
}

TEST_CASE("evaluate marks estimates without accepted frames") {
  Scratch dir("empty");
  write_text(dir / "est.csv", "frame_start_s,accepted,classifier_value,lag_s,angle_rad,emit_wallclock_s\n"
                              "0,0,0.5,,,0.01\n");
  write_text(dir / "a.json", R"({"label":"x","weight":1,"speech_intervals":[[0.0,0.3]],"angle_track":[[0.0,0.0]]})");
  std::string out;
  REQUIRE(run({"evaluate", "--estimates", dir / "est.csv", "--annotation", dir / "a.json"}, &out) == 0);
  const auto m = json::parse(out);
  CHECK(m.at("marker") == "no speech windows");
}

TEST_CASE("calibrate and exit codes") {
  Scratch dir("calibrate");
  const HeadModel truth{0.2, 343.0};
  std::ostringstream csv;
  csv << "theta_rad,tau_s\n";
  for (double t : {0.1, 0.5, -0.8, 1.2}) csv << t << ',' << itd_woodworth(AzimuthRad(t), truth) << '\n';
  write_text(dir / "obs.csv", csv.str());
  REQUIRE(run({"calibrate", "--observations", dir / "obs.csv", "--out", dir / "fit.json"}) == 0);
  CHECK(read_json(dir / "fit.json").at("ear_distance_m").get<double>() == doctest::Approx(0.2).epsilon(1e-6));

  write_text(dir / "zero.csv", "theta_rad,tau_s\n0,0\n0,0\n");
  CHECK(run({"calibrate", "--observations", dir / "zero.csv"}) == cli::kExitDomainError);
  CHECK(run({"calibrate", "--observations", dir / "missing.csv"}) == cli::kExitInputError);
  CHECK(run({"frobnicate"}) == cli::kExitInputError);
  CHECK(run({"estimate", "--wav", dir / "obs.csv"}) == cli::kExitInputError);
  CHECK(run({"--help"}) == cli::kExitOk);
}
