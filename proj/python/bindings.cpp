// Thin pybind11 layer. Structured values cross the boundary as JSON strings; the Python package
// turns them into dicts.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <vector>

#include "doalab/annotation_io.hpp"
#include "doalab/errors.hpp"
#include "doalab/head_geometry.hpp"
#include "doalab/param_opt.hpp"
#include "doalab/pipeline.hpp"
#include "doalab/scene_sim.hpp"
#include "doalab/tde.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw doalab::InvalidArgument("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

doalab::HeadModel model_of(double ear_distance, double speed) { return {ear_distance, speed}; }

doalab::AnnotatedRecording recording_of(const Array& left, const Array& right, double fs,
                                        const std::string& annotation_json) {
  doalab::StereoSignal audio(doalab::MonoSignal(to_vector(left), fs), doalab::MonoSignal(to_vector(right), fs));
  if (annotation_json.empty()) {
    doalab::AnnotatedRecording rec;
    rec.audio = std::move(audio);
    rec.angle_track = {{0.0, 0.0}};
    return rec;
  }
  return doalab::io::attach(std::move(audio), doalab::io::annotation_from_json(json::parse(annotation_json)));
}

json estimates_json(const std::vector<doalab::DoaEstimate>& est) {
  json out = json::array();
  for (const auto& e : est) {
    out.push_back({{"frame_start_s", e.frame_start_s},
                   {"accepted", e.accepted},
                   {"classifier_value", std::isnan(e.classifier_value) ? json(nullptr) : json(e.classifier_value)},
                   {"angle_rad", e.angle ? json(e.angle->value()) : json(nullptr)},
                   {"lag_s", e.accepted ? json(e.lag_seconds) : json(nullptr)}});
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_doalab, m) {
  m.doc() = "Native core of the doalab package";

  // Translators run newest first, so the base class goes in before the derived ones.
  const auto& base = py::register_exception<doalab::Error>(m, "DoaLabError");
  py::register_exception<doalab::Unidentifiable>(m, "Unidentifiable", base);
  py::register_exception<doalab::InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  m.def("itd_woodworth", [](double theta, double d, double v) {
    return doalab::itd_woodworth(doalab::AzimuthRad(theta), model_of(d, v));
  }, py::arg("theta_rad"), py::arg("ear_distance") = doalab::HeadModel::kDefaultEarDistance,
        py::arg("speed_of_sound") = doalab::HeadModel::kDefaultSpeedOfSound);

  m.def("angle_from_itd", [](double tau, double d, double v) {
    const auto a = doalab::angle_from_itd(tau, model_of(d, v));
    return py::make_tuple(a.angle.value(), a.clipped);
  }, py::arg("tau_s"), py::arg("ear_distance") = doalab::HeadModel::kDefaultEarDistance,
        py::arg("speed_of_sound") = doalab::HeadModel::kDefaultSpeedOfSound);

  m.def("calibrate", [](const Array& theta, const Array& tau, double v) {
    const auto t = to_vector(theta);
    const auto s = to_vector(tau);
    if (t.size() != s.size()) throw doalab::InvalidArgument("theta and tau lengths differ");
    std::vector<doalab::CalibrationObservation> obs;
    for (std::size_t i = 0; i < t.size(); ++i) obs.push_back({doalab::AzimuthRad(t[i]), s[i]});
    const auto fit = doalab::calibrate_distance(obs, v);
    return py::make_tuple(fit.ear_distance_m, fit.residual_sum_squares);
  }, py::arg("theta_rad"), py::arg("tau_s"), py::arg("speed_of_sound") = doalab::HeadModel::kDefaultSpeedOfSound);

  m.def("gcc", [](const Array& left, const Array& right, double fs, const std::string& timing,
                  std::size_t max_lag) {
    const auto l = to_vector(left);
    const auto r = to_vector(right);
    const auto out = doalab::gcc(l, r, fs, doalab::parse_weighting(timing), max_lag);
    return py::make_tuple(out.result.lag_samples, out.result.prominence, to_array(out.correlogram.values));
  }, py::arg("left"), py::arg("right"), py::arg("sample_rate"), py::arg("timing"), py::arg("max_lag"));

  m.def("run_pipeline", [](const Array& left, const Array& right, double fs, const std::string& params_json,
                           double d, double v) {
    const auto rec = recording_of(left, right, fs, "");
    const auto params = doalab::params_from_json(json::parse(params_json));
    return estimates_json(doalab::run_pipeline(rec, params, model_of(d, v))).dump();
  }, py::arg("left"), py::arg("right"), py::arg("sample_rate"), py::arg("params_json"),
        py::arg("ear_distance") = doalab::HeadModel::kDefaultEarDistance,
        py::arg("speed_of_sound") = doalab::HeadModel::kDefaultSpeedOfSound);

  m.def("score", [](const Array& left, const Array& right, double fs, const std::string& params_json,
                    const std::string& annotation_json) {
    const auto rec = recording_of(left, right, fs, annotation_json);
    const auto params = doalab::params_from_json(json::parse(params_json));
    const auto est = doalab::run_pipeline(rec, params, doalab::HeadModel{});
    return doalab::io::to_json(doalab::evaluate(est, rec)).dump();
  }, py::arg("left"), py::arg("right"), py::arg("sample_rate"), py::arg("params_json"),
        py::arg("annotation_json"));

  m.def("default_params", [] { return doalab::to_json(doalab::PipelineParams::best()).dump(); });

  m.def("render_scene", [](const std::string& scene_json) {
    const auto rec = doalab::render(doalab::scene_from_json(json::parse(scene_json)));
    return py::make_tuple(to_array(rec.audio.left().samples()), to_array(rec.audio.right().samples()),
                          rec.audio.sample_rate(), doalab::io::to_json(doalab::io::annotation_of(rec)).dump());
  }, py::arg("scene_json"));

  m.def("default_suite", [](std::uint64_t seed) {
    const auto suite = doalab::default_suite(seed);
    json out = json::array();
    for (const auto& s : suite.train) out.push_back(doalab::to_json(s));
    for (const auto& s : suite.test) out.push_back(doalab::to_json(s));
    return out.dump();
  }, py::arg("seed") = 0);
}
