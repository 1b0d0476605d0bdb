#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "doalab/annotation_io.hpp"
#include "doalab/errors.hpp"
#include "doalab/param_opt.hpp"

namespace doalab {

using nlohmann::json;

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::Doa: return "doa";
    case ObjectiveKind::Classification: return "classification";
    case ObjectiveKind::Joint: return "joint";
    case ObjectiveKind::JointReg: return "jointreg";
  }
  return "?";
}

ObjectiveKind parse_objective(std::string_view name) {
  if (name == "doa" || name == "mse") return ObjectiveKind::Doa;
  if (name == "classification" || name == "f1") return ObjectiveKind::Classification;
  if (name == "joint") return ObjectiveKind::Joint;
  if (name == "jointreg" || name == "joint_reg" || name == "joint-reg") return ObjectiveKind::JointReg;
  throw InvalidArgument("unknown objective '" + std::string(name) + "'");
}

double aggregate(std::span<const Metrics> per_recording, std::span<const int> weights,
                 const Objective& objective, double frame_size_s) {
  if (per_recording.size() != weights.size()) {
    throw InvalidArgument("aggregate: metrics and weights differ in length");
  }
  if (per_recording.empty()) throw InvalidArgument("aggregate: no recordings");
  if (!(objective.lambda >= 0.0)) throw InvalidArgument("aggregate: lambda must be >= 0");

  const bool joint = objective.kind == ObjectiveKind::Joint || objective.kind == ObjectiveKind::JointReg;
  double weight_sum = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < per_recording.size(); ++i) {
    const Metrics& m = per_recording[i];
    const double w = weights[i];
    if (!(w > 0.0)) throw InvalidArgument("aggregate: weights must be positive");
    if (m.no_speech_windows || (joint && m.f1 == 0.0)) return kPenalty;
    weight_sum += w;
    switch (objective.kind) {
      case ObjectiveKind::Classification: acc += w * m.f1; break;
      case ObjectiveKind::Doa: acc += w * m.mse; break;
      case ObjectiveKind::Joint:
      case ObjectiveKind::JointReg: acc += w * (m.mse / m.f1); break;
    }
  }
  double value = acc / weight_sum;
  if (objective.kind == ObjectiveKind::Classification) value = -value;
  if (objective.kind == ObjectiveKind::JointReg) value += objective.lambda * std::abs(frame_size_s);
  return value;
}

json to_json(const PipelineParams& p) {
  return json{{"classifier", std::string(to_string(p.classifier))},
              {"timing", std::string(to_string(p.timing))},
              {"frame_size_s", p.framing.frame_size_s},
              {"step_fraction", p.framing.step_fraction},
              {"delta_low", p.thresholds.delta_low()},
              {"delta_high", p.thresholds.delta_high()}};
}

PipelineParams params_from_json(const json& j) {
  try {
    PipelineParams p;
    p.classifier = parse_classifier(j.at("classifier").get<std::string>());
    p.timing = parse_weighting(j.at("timing").get<std::string>());
    p.framing = FramingParams{j.at("frame_size_s").get<double>(), j.at("step_fraction").get<double>()};
    p.thresholds = Thresholds(j.at("delta_low").get<double>(), j.at("delta_high").get<double>());
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad parameter JSON: ") + e.what());
  }
}

json to_json(const Trial& t) {
  json metrics = json::array();
  for (const auto& m : t.per_recording) metrics.push_back(io::to_json(m));
  return json{{"index", t.index},
              {"params", to_json(t.params)},
              {"per_recording", metrics},
              {"objective", t.objective},
              {"valid", t.valid}};
}

Trial trial_from_json(const json& j) {
  try {
    Trial t;
    t.index = j.value("index", std::size_t{0});
    t.params = params_from_json(j.at("params"));
    for (const auto& m : j.at("per_recording")) t.per_recording.push_back(io::metrics_from_json(m));
    t.objective = j.at("objective").get<double>();
    t.valid = j.at("valid").get<bool>();
    return t;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad trial record: ") + e.what());
  }
}

void write_trials_jsonl(std::ostream& out, std::span<const Trial> trials) {
  for (const auto& t : trials) out << to_json(t).dump() << '\n';
}

std::vector<Trial> read_trials_jsonl(std::istream& in) {
  std::vector<Trial> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(trial_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw InvalidArgument(std::string("malformed trials line: ") + e.what());
    }
  }
  return out;
}

DatasetEvaluator::DatasetEvaluator(std::span<const AnnotatedRecording> dataset, HeadModel model,
                                   Objective objective, PipelineOptions options)
    : dataset_(dataset), model_(model), objective_(objective), options_(std::move(options)) {
  if (dataset_.empty()) throw InvalidArgument("evaluator needs at least one recording");
  for (const auto& rec : dataset_) weights_.push_back(rec.weight);
}

std::vector<Trial> DatasetEvaluator::evaluate_thresholds(ClassifierKind classifier, WeightingKind timing,
                                                         const FramingParams& framing,
                                                         std::span<const Thresholds> thresholds) {
  std::vector<Trial> trials(thresholds.size());
  std::vector<std::size_t> pending;
  {
    std::lock_guard lock(mutex_);
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      trials[k].params = PipelineParams{classifier, timing, framing, thresholds[k]};
      if (auto it = cache_.find(Key{trials[k].params}); it != cache_.end()) {
        trials[k] = it->second;
      } else {
        pending.push_back(k);
      }
    }
  }
  if (pending.empty()) return trials;

  // Recordings are visited in order; a trial drops out at its first recording without speech.
  std::vector<bool> stopped(thresholds.size(), false);
  for (const auto& rec : dataset_) {
    bool any_active = false;
    for (auto k : pending) any_active = any_active || !stopped[k];
    if (!any_active) break;
    FrameAnalysis analysis(rec, classifier, timing, framing, model_, options_);
    for (auto k : pending) {
      if (stopped[k]) continue;
      const auto estimates = analysis.estimates(thresholds[k]);
      const Metrics m = doalab::evaluate(estimates, rec);
      trials[k].per_recording.push_back(m);
      if (m.no_speech_windows) stopped[k] = true;
    }
  }

  std::lock_guard lock(mutex_);
  for (auto k : pending) {
    Trial& t = trials[k];
    if (stopped[k]) {
      t.objective = kPenalty;
    } else {
      t.objective = aggregate(t.per_recording, weights_, objective_, framing.frame_size_s);
    }
    t.valid = t.objective < kPenalty;
    cache_.emplace(Key{t.params}, t);
  }
  return trials;
}

Trial DatasetEvaluator::evaluate(const PipelineParams& params) {
  params.validate();
  const Thresholds th = params.thresholds;
  return evaluate_thresholds(params.classifier, params.timing, params.framing,
                             std::span<const Thresholds>(&th, 1))
      .front();
}

TrialFunction DatasetEvaluator::as_function() {
  return [this](const PipelineParams& p) { return evaluate(p); };
}

std::size_t DatasetEvaluator::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

}  // namespace doalab
