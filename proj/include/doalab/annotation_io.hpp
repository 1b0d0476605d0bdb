#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "doalab/pipeline.hpp"

namespace doalab::io {

/// Sidecar annotation, without audio.
struct Annotation {
  std::string label;
  int weight = 1;
  std::vector<Interval> speech_intervals;
  std::vector<AngleKnot> angle_track;
};

[[nodiscard]] nlohmann::json to_json(const Annotation& a);
[[nodiscard]] Annotation annotation_from_json(const nlohmann::json& j);
[[nodiscard]] Annotation read_annotation(const std::filesystem::path& path);
void write_annotation(const std::filesystem::path& path, const Annotation& a);

[[nodiscard]] Annotation annotation_of(const AnnotatedRecording& rec);
[[nodiscard]] AnnotatedRecording attach(StereoSignal audio, const Annotation& a);

struct ManifestEntry {
  std::string label;
  std::string split;  ///< "train" or "test"
  int weight = 1;
  std::filesystem::path wav;         ///< relative to the manifest directory
  std::filesystem::path annotation;  ///< relative to the manifest directory
};

[[nodiscard]] std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

/// Loads WAV + sidecar for every entry, in manifest order, optionally filtered by split.
[[nodiscard]] std::vector<AnnotatedRecording> load_dataset(const std::filesystem::path& manifest,
                                                           const std::optional<std::string>& split = {});

/// Header: frame_start_s,accepted,classifier_value,lag_s,angle_rad,emit_wallclock_s. Rejected rows
/// leave lag_s and angle_rad empty. With `degrees` the angle column is angle_deg. The last column
/// contains measured processing time and is the only one that varies between identical runs.
void write_estimates_csv(std::ostream& out, const std::vector<DoaEstimate>& estimates,
                         bool degrees = false);
/// Parses either angle unit; `frame_size_s` is stamped onto each estimate.
[[nodiscard]] std::vector<DoaEstimate> read_estimates_csv(std::istream& in, double frame_size_s);

[[nodiscard]] nlohmann::json to_json(const Metrics& m);
[[nodiscard]] Metrics metrics_from_json(const nlohmann::json& j);

/// Formats a double so it parses back to the same value.
[[nodiscard]] std::string format_double(double v);

}  // namespace doalab::io
