#include "doalab/annotation_io.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "doalab/errors.hpp"
#include "doalab/wav.hpp"

namespace doalab::io {

using nlohmann::json;

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidArgument("write failed for " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument("not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

json to_json(const Annotation& a) {
  json intervals = json::array();
  for (const auto& iv : a.speech_intervals) intervals.push_back({iv.start_s, iv.end_s});
  json track = json::array();
  for (const auto& k : a.angle_track) track.push_back({k.t_s, k.theta_rad});
  return json{{"label", a.label}, {"weight", a.weight}, {"speech_intervals", intervals},
              {"angle_track", track}};
}

Annotation annotation_from_json(const json& j) {
  try {
    Annotation a;
    a.label = j.value("label", std::string{});
    a.weight = j.value("weight", 1);
    for (const auto& iv : j.at("speech_intervals")) {
      a.speech_intervals.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
    }
    for (const auto& k : j.at("angle_track")) {
      a.angle_track.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
    }
    return a;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad annotation JSON: ") + e.what());
  }
}

Annotation read_annotation(const std::filesystem::path& path) {
  return annotation_from_json(read_json_file(path));
}

void write_annotation(const std::filesystem::path& path, const Annotation& a) {
  write_text_file(path, to_json(a).dump(2) + "\n");
}

Annotation annotation_of(const AnnotatedRecording& rec) {
  return Annotation{rec.label, rec.weight, rec.speech_intervals, rec.angle_track};
}

AnnotatedRecording attach(StereoSignal audio, const Annotation& a) {
  AnnotatedRecording rec{std::move(audio), a.speech_intervals, a.angle_track, a.weight, a.label};
  rec.validate();
  return rec;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  std::vector<ManifestEntry> entries;
  try {
    for (const auto& e : j.at("recordings")) {
      entries.push_back(ManifestEntry{e.value("label", std::string{}), e.value("split", std::string("train")),
                                      e.value("weight", 1), e.at("wav").get<std::string>(),
                                      e.at("annotation").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad manifest: ") + e.what());
  }
  return entries;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  json list = json::array();
  for (const auto& e : entries) {
    list.push_back({{"label", e.label}, {"split", e.split}, {"weight", e.weight},
                    {"wav", e.wav.generic_string()}, {"annotation", e.annotation.generic_string()}});
  }
  write_text_file(path, json{{"recordings", list}}.dump(2) + "\n");
}

std::vector<AnnotatedRecording> load_dataset(const std::filesystem::path& manifest,
                                             const std::optional<std::string>& split) {
  const auto dir = manifest.parent_path();
  std::vector<AnnotatedRecording> out;
  for (const auto& e : read_manifest(manifest)) {
    if (split && e.split != *split) continue;
    auto ann = read_annotation(dir / e.annotation);
    ann.weight = e.weight;
    if (ann.label.empty()) ann.label = e.label;
    out.push_back(attach(wav::read_stereo(dir / e.wav), ann));
  }
  return out;
}

void write_estimates_csv(std::ostream& out, const std::vector<DoaEstimate>& estimates, bool degrees) {
  out << "frame_start_s,accepted,classifier_value,lag_s," << (degrees ? "angle_deg" : "angle_rad")
      << ",emit_wallclock_s\n";
  for (const auto& e : estimates) {
    out << format_double(e.frame_start_s) << ',' << (e.accepted ? 1 : 0) << ','
        << format_double(e.classifier_value) << ',';
    if (e.accepted) {
      const double angle = degrees ? e.angle->degrees() : e.angle->value();
      out << format_double(e.lag_seconds) << ',' << format_double(angle);
    } else {
      out << ',';
    }
    out << ',' << format_double(e.emit_time_s) << '\n';
  }
}

std::vector<DoaEstimate> read_estimates_csv(std::istream& in, double frame_size_s) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("estimates CSV is empty");
  if (line.rfind("frame_start_s,accepted", 0) != 0) throw InvalidArgument("estimates CSV: bad header");
  const bool degrees = line.find("angle_deg") != std::string::npos;
  std::vector<DoaEstimate> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 6) throw InvalidArgument("estimates CSV: expected 6 columns: " + line);
    DoaEstimate e;
    e.frame_start_s = parse_double(cells[0]);
    e.frame_size_s = frame_size_s;
    e.accepted = cells[1] == "1";
    e.classifier_value = parse_double(cells[2]);
    e.lag_seconds = cells[3].empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(cells[3]);
    if (e.accepted) {
      if (cells[4].empty()) throw InvalidArgument("estimates CSV: accepted row without angle");
      const double a = parse_double(cells[4]);
      e.angle = degrees ? AzimuthRad::from_degrees(a) : AzimuthRad(a);
    }
    e.emit_time_s = parse_double(cells[5]);
    out.push_back(e);
  }
  return out;
}

json to_json(const Metrics& m) {
  return json{{"f1", m.f1},
              {"mse_rad2", m.mse},
              {"n_accepted", m.n_accepted},
              {"n_frames", m.n_frames},
              {"n_true_positive", m.n_true_positive},
              {"n_false_positive", m.n_false_positive},
              {"n_false_negative", m.n_false_negative},
              {"no_speech_windows", m.no_speech_windows}};
}

Metrics metrics_from_json(const json& j) {
  Metrics m;
  m.f1 = j.at("f1").get<double>();
  m.mse = j.at("mse_rad2").get<double>();
  m.n_accepted = j.value("n_accepted", std::size_t{0});
  m.n_frames = j.value("n_frames", std::size_t{0});
  m.n_true_positive = j.value("n_true_positive", std::size_t{0});
  m.n_false_positive = j.value("n_false_positive", std::size_t{0});
  m.n_false_negative = j.value("n_false_negative", std::size_t{0});
  m.no_speech_windows = j.value("no_speech_windows", m.n_accepted == 0);
  return m;
}

}  // namespace doalab::io
