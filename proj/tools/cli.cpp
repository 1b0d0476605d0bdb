#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "doalab/annotation_io.hpp"
#include "doalab/errors.hpp"
#include "doalab/param_opt.hpp"
#include "doalab/scene_sim.hpp"
#include "doalab/stats.hpp"
#include "doalab/thread_pool.hpp"
#include "doalab/wav.hpp"

namespace doalab::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidArgument("cannot create output directory " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + path.string());
  return f;
}

/// Writes to `path` if given, else to `fallback`.
template <typename F>
void emit(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  auto f = open_out(path);
  write(f);
  if (!f) throw InvalidArgument("failed writing " + path);
}

struct ModelFlags {
  double ear_distance = HeadModel::kDefaultEarDistance;
  double speed = HeadModel::kDefaultSpeedOfSound;

  void add(CLI::App* app) {
    app->add_option("--ear-distance", ear_distance, "Microphone distance D in meters");
    app->add_option("--speed-of-sound", speed, "Speed of sound in m/s");
  }
  [[nodiscard]] HeadModel model() const { return HeadModel(ear_distance, speed); }
};

/// Pipeline parameters from an optional JSON file, overridden by individual flags.
struct ParamFlags {
  std::string file;
  std::optional<std::string> classifier;
  std::optional<std::string> timing;
  std::optional<double> frame_size;
  std::optional<double> step;
  std::optional<double> delta_low;
  std::optional<double> delta_high;

  void add(CLI::App* app) {
    app->add_option("--params", file, "Parameter JSON (a best.json from optimize also works)");
    app->add_option("--classifier", classifier, "po | srmr");
    app->add_option("--timing", timing, "cc | phat | scot");
    app->add_option("--frame-size", frame_size, "Frame size in seconds");
    app->add_option("--step", step, "Step as a fraction of the frame");
    app->add_option("--delta-low", delta_low, "Lower classifier threshold");
    app->add_option("--delta-high", delta_high, "Upper classifier threshold");
  }

  [[nodiscard]] PipelineParams params() const {
    PipelineParams p = PipelineParams::best();
    if (!file.empty()) {
      const json j = read_json_file(file);
      if (j.contains("best") && j["best"].contains("params")) {
        p = params_from_json(j["best"]["params"]);
      } else {
        p = params_from_json(j.contains("params") ? j["params"] : j);
      }
    }
    if (classifier) p.classifier = parse_classifier(*classifier);
    if (timing) p.timing = parse_weighting(*timing);
    if (frame_size) p.framing.frame_size_s = *frame_size;
    if (step) p.framing.step_fraction = *step;
    if (delta_low || delta_high) {
      p.thresholds = Thresholds(delta_low.value_or(p.thresholds.delta_low()),
                                delta_high.value_or(p.thresholds.delta_high()));
    }
    p.validate();
    return p;
  }
};

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw InvalidArgument("not a number: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw InvalidArgument("not a number: '" + s + "'");
  }
}

// ------------------------------------------------------------------------------------------------

struct SimulateCmd {
  std::string spec;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t latency_onsets = 0;

  void add(CLI::App* app) {
    app->add_option("--spec", spec, "Scene JSON: one scene object or {\"scenes\": [...]}; default suite if omitted");
    app->add_option("--seed", seed, "Seed of the default suite");
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--latency-onsets", latency_onsets,
                    "Also write a latency scene with this many utterances (latency_manifest.json)");
  }

  int run(std::ostream& o) const {
    std::vector<std::pair<SceneSpec, std::string>> scenes;  // spec, split
    if (spec.empty()) {
      const auto suite = default_suite(seed);
      for (const auto& s : suite.train) scenes.emplace_back(s, "train");
      for (const auto& s : suite.test) scenes.emplace_back(s, "test");
    } else {
      const json j = read_json_file(spec);
      if (j.contains("scenes")) {
        for (const auto& s : j.at("scenes")) scenes.emplace_back(scene_from_json(s), s.value("split", "train"));
      } else {
        scenes.emplace_back(scene_from_json(j), j.value("split", "train"));
      }
    }
    ensure_dir(out);
    const auto entries = write_scenes(scenes);
    io::write_manifest(fs::path(out) / "manifest.json", entries);
    o << "wrote " << entries.size() << " recordings to " << out << '\n';
    if (latency_onsets > 0) {
      const auto lat = write_scenes({{latency_scene(seed, latency_onsets), "latency"}});
      io::write_manifest(fs::path(out) / "latency_manifest.json", lat);
      o << "wrote latency scene with " << latency_onsets << " onsets\n";
    }
    return kExitOk;
  }

  [[nodiscard]] std::vector<io::ManifestEntry> write_scenes(
      const std::vector<std::pair<SceneSpec, std::string>>& scenes) const {
    std::vector<AnnotatedRecording> recs(scenes.size());
    parallel_for(scenes.size(), [&](std::size_t i) { recs[i] = render(scenes[i].first); }, worker_count());
    std::vector<io::ManifestEntry> entries;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      std::string label = scenes[i].first.label;
      if (label.empty()) label = "scene" + std::to_string(i + 1);
      const fs::path wav_name = label + ".wav";
      const fs::path json_name = label + ".json";
      wav::write(fs::path(out) / wav_name, recs[i].audio);
      io::write_annotation(fs::path(out) / json_name, io::annotation_of(recs[i]));
      entries.push_back({label, scenes[i].second, recs[i].weight, wav_name, json_name});
    }
    return entries;
  }
};

struct EstimateCmd {
  std::string wav_path;
  std::string out;
  bool degrees = false;
  ParamFlags params;
  ModelFlags model;

  void add(CLI::App* app) {
    app->add_option("--wav", wav_path, "Stereo (or mono) WAV file")->required();
    app->add_option("--out", out, "Estimates CSV (stdout if omitted)");
    app->add_flag("--degrees", degrees, "Write angles in degrees");
    params.add(app);
    model.add(app);
  }

  int run(std::ostream& o) const {
    if (!fs::exists(wav_path)) throw InvalidArgument("no such file: " + wav_path);
    AnnotatedRecording rec;
    rec.audio = wav::read_stereo(wav_path);
    rec.angle_track = {{0.0, 0.0}};
    const auto estimates = run_pipeline(rec, params.params(), model.model());
    emit(out, o, [&](std::ostream& s) { io::write_estimates_csv(s, estimates, degrees); });
    return kExitOk;
  }
};

struct EvaluateCmd {
  std::string estimates;
  std::string annotation;
  double frame_size = 0.34;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--estimates", estimates, "Estimates CSV written by `estimate`")->required();
    app->add_option("--annotation", annotation, "Annotation sidecar JSON")->required();
    app->add_option("--frame-size", frame_size, "Frame size the estimates were made with (s)");
    app->add_option("--out", out, "Metrics JSON (stdout if omitted)");
  }

  int run(std::ostream& o) const {
    std::ifstream in(estimates);
    if (!in) throw InvalidArgument("cannot open " + estimates);
    const auto est = io::read_estimates_csv(in, frame_size);
    AnnotatedRecording rec;
    const auto ann = io::read_annotation(annotation);
    rec.speech_intervals = ann.speech_intervals;
    rec.angle_track = ann.angle_track;
    rec.label = ann.label;
    rec.validate();
    const Metrics m = evaluate(est, rec);
    json j = io::to_json(m);
    if (m.no_speech_windows) j["marker"] = "no speech windows";
    emit(out, o, [&](std::ostream& s) { s << j.dump(2) << '\n'; });
    return kExitOk;
  }
};

struct OptimizeCmd {
  std::string manifest;
  std::string space_path;
  std::string method = "tpe";
  std::string objective = "jointreg";
  double lambda = 0.5;
  std::size_t trials = 300;
  std::uint64_t seed = 0;
  std::string out;
  std::string split = "train";
  ModelFlags model;

  void add(CLI::App* app) {
    app->add_option("--manifest", manifest, "Dataset manifest")->required();
    app->add_option("--space", space_path, "Search space JSON (default: the grid or distribution table)");
    app->add_option("--method", method, "grid | tpe | random")
        ->check(CLI::IsMember({"grid", "tpe", "random"}));
    app->add_option("--objective", objective, "doa | classification | joint | jointreg");
    app->add_option("--lambda", lambda, "Frame-size weight of jointreg");
    app->add_option("--trials", trials, "Trial budget (ignored by grid)");
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--out", out, "Output directory for trials.jsonl and best.json")->required();
    app->add_option("--split", split, "Manifest split to fit on (empty = all)");
    model.add(app);
  }

  int run(std::ostream& o) const {
    const Objective obj{parse_objective(objective), lambda};
    ParamSpace space;
    if (!space_path.empty()) {
      space = space_from_json(read_json_file(space_path));
    } else {
      space = method == "grid" ? ParamSpace::table2_grid() : ParamSpace::table2_tpe();
    }
    const auto dataset = io::load_dataset(manifest, split.empty() ? std::nullopt : std::optional(split));
    if (dataset.empty()) throw InvalidArgument("manifest has no recordings in split '" + split + "'");
    ensure_dir(out);

    DatasetEvaluator evaluator(dataset, model.model(), obj);
    SearchResult result;
    if (method == "grid") {
      result = grid_search(space, evaluator, worker_count());
    } else if (method == "tpe") {
      TpeConfig cfg;
      cfg.seed = seed;
      result = tpe_optimize(space, evaluator.as_function(), trials, cfg);
    } else {
      result = random_search(space, evaluator.as_function(), trials, seed);
    }

    {
      auto f = open_out(fs::path(out) / "trials.jsonl");
      write_trials_jsonl(f, result.trials);
    }
    json summary{{"method", method},
                 {"objective", std::string(to_string(obj.kind))},
                 {"lambda", obj.lambda},
                 {"seed", seed},
                 {"n_trials", result.trials.size()},
                 {"best_so_far", result.best_so_far()}};
    summary["best"] = result.best ? to_json(*result.best) : json(nullptr);
    {
      auto f = open_out(fs::path(out) / "best.json");
      f << summary.dump(2) << '\n';
    }
    o << "ran " << result.trials.size() << " trials";
    if (result.best) o << ", best objective " << io::format_double(result.best->objective);
    o << '\n';
    return kExitOk;
  }
};

struct LatencyCmd {
  std::string manifest;
  std::string frame_sizes = "0.35,0.45,0.60";
  std::size_t repeats = 1;
  std::string split;
  std::string out;
  ParamFlags params;
  ModelFlags model;

  void add(CLI::App* app) {
    app->add_option("--manifest", manifest, "Manifest of recordings to stream")->required();
    app->add_option("--frame-sizes", frame_sizes, "Comma-separated frame sizes in seconds");
    app->add_option("--repeats", repeats, "Passes over each recording");
    app->add_option("--split", split, "Manifest split to use (empty = all)");
    app->add_option("--out", out, "Latency JSON (stdout if omitted)");
    params.add(app);
    model.add(app);
  }

  int run(std::ostream& o) const {
    std::vector<double> sizes;
    for (const auto& s : split_commas(frame_sizes)) sizes.push_back(parse_number(s));
    if (sizes.empty()) throw InvalidArgument("no frame sizes given");
    if (repeats == 0) throw InvalidArgument("--repeats must be >= 1");
    const auto dataset = io::load_dataset(manifest, split.empty() ? std::nullopt : std::optional(split));
    if (dataset.empty()) throw InvalidArgument("manifest has no recordings");
    const PipelineParams base = params.params();

    json groups = json::array();
    std::vector<LatencyStats> stats;
    for (double size : sizes) {
      PipelineParams p = base;
      p.framing.frame_size_s = size;
      p.validate();
      stats.push_back(latency_experiment(dataset, p, model.model(), repeats));
      const auto& s = stats.back();
      groups.push_back({{"frame_size_s", size},
                        {"events", s.events},
                        {"dropped", s.dropped},
                        {"wallclock_mean_latency_s", s.latencies_s.empty() ? json(nullptr) : json(s.mean_s)},
                        {"wallclock_std_latency_s", s.latencies_s.size() < 2 ? json(nullptr) : json(s.std_s)},
                        {"wallclock_latencies_s", s.latencies_s}});
    }
    json j{{"groups", groups}};
    if (stats.size() >= 2 && stats.front().latencies_s.size() >= 2 && stats.back().latencies_s.size() >= 2) {
      const auto t = welch_t_test(stats.front().latencies_s, stats.back().latencies_s);
      j["t_test"] = {{"groups", {sizes.front(), sizes.back()}},
                     {"kind", "welch"},
                     {"t", t.t},
                     {"dof", t.dof},
                     {"p_two_sided", t.p_two_sided}};
    }
    emit(out, o, [&](std::ostream& s) { s << j.dump(2) << '\n'; });
    return kExitOk;
  }
};

struct CalibrateCmd {
  std::string observations;
  double speed = HeadModel::kDefaultSpeedOfSound;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--observations", observations,
                    "CSV with header theta_rad,tau_s (or theta_deg,tau_s)")
        ->required();
    app->add_option("--speed-of-sound", speed, "Speed of sound in m/s");
    app->add_option("--out", out, "Fit JSON (stdout if omitted)");
  }

  int run(std::ostream& o) const {
    std::ifstream in(observations);
    if (!in) throw InvalidArgument("cannot open " + observations);
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("observations CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool degrees = false;
    if (line == "theta_deg,tau_s") {
      degrees = true;
    } else if (line != "theta_rad,tau_s") {
      throw InvalidArgument("observations CSV: expected header theta_rad,tau_s or theta_deg,tau_s");
    }
    std::vector<CalibrationObservation> obs;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto cells = split_commas(line);
      if (cells.size() != 2) throw InvalidArgument("observations CSV: expected 2 columns: " + line);
      const double theta = parse_number(cells[0]);
      obs.push_back({degrees ? AzimuthRad::from_degrees(theta) : AzimuthRad(theta), parse_number(cells[1])});
    }
    const auto fit = calibrate_distance(obs, speed);
    json j{{"ear_distance_m", fit.ear_distance_m},
           {"residual_sum_squares", fit.residual_sum_squares},
           {"n_observations", obs.size()},
           {"speed_of_sound_mps", speed}};
    emit(out, o, [&](std::ostream& s) { s << j.dump(2) << '\n'; });
    return kExitOk;
  }
};

struct ContourCmd {
  std::string trials;
  std::string x = "frame_size";
  std::string y = "step_fraction";
  std::string stat = "min";
  std::size_t bins = 20;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--trials", trials, "trials.jsonl from optimize")->required();
    app->add_option("--x", x, "frame_size | step_fraction | delta_low | delta_high");
    app->add_option("--y", y, "frame_size | step_fraction | delta_low | delta_high");
    app->add_option("--stat", stat, "min | mean")->check(CLI::IsMember({"min", "mean"}));
    app->add_option("--bins", bins, "Bins per axis for continuous parameters");
    app->add_option("--out", out, "Grid CSV (stdout if omitted)");
  }

  int run(std::ostream& o) const {
    std::ifstream in(trials);
    if (!in) throw InvalidArgument("cannot open " + trials);
    const auto t = read_trials_jsonl(in);
    const auto grid = contour_export(t, x, y, stat == "min" ? ContourStat::Min : ContourStat::Mean, bins);
    emit(out, o, [&](std::ostream& s) { write_contour_csv(s, grid); });
    return kExitOk;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Binaural direction-of-arrival pipeline: simulation, estimation and parameter search"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "doalab 0.1.0");

  SimulateCmd simulate;
  EstimateCmd estimate;
  EvaluateCmd evaluate_cmd;
  OptimizeCmd optimize;
  LatencyCmd latency;
  CalibrateCmd calibrate;
  ContourCmd contour;
  simulate.add(app.add_subcommand("simulate", "Render synthetic scenes to WAV + annotation files"));
  estimate.add(app.add_subcommand("estimate", "Run the pipeline on a WAV file"));
  evaluate_cmd.add(app.add_subcommand("evaluate", "Score estimates against an annotation"));
  optimize.add(app.add_subcommand("optimize", "Search pipeline parameters on a dataset"));
  latency.add(app.add_subcommand("latency", "Simulated streaming latency per frame size"));
  calibrate.add(app.add_subcommand("calibrate", "Fit the ear distance from (theta, tau) observations"));
  contour.add(app.add_subcommand("contour", "Bin trials into a plot-ready grid"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "simulate") return simulate.run(out);
    if (name == "estimate") return estimate.run(out);
    if (name == "evaluate") return evaluate_cmd.run(out);
    if (name == "optimize") return optimize.run(out);
    if (name == "latency") return latency.run(out);
    if (name == "calibrate") return calibrate.run(out);
    if (name == "contour") return contour.run(out);
    return kExitInputError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
}

}  // namespace doalab::cli
