#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doalab/errors.hpp"
#include "doalab/param_opt.hpp"
#include "doalab/stats.hpp"

using namespace doalab;
using doctest::Approx;

namespace {

Metrics metric(double f1, double mse) {
  Metrics m;
  m.f1 = f1;
  m.mse = mse;
  m.n_accepted = 1;
  m.no_speech_windows = false;
  return m;
}

const std::vector<int> kSigma(kScenarioWeights.begin(), kScenarioWeights.end());

// Exponentially growing 100 Hz tone: with hops that are whole periods every onset ratio equals
// growth^(2 hop), here about 1.5 for 0.1 s hops, so only delta_low below that accepts frames.
AnnotatedRecording growing_tone() {
  const double fs = 16000, growth = std::pow(1.5, 5.0);
  std::vector<double> x(16000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = double(i) / fs;
    x[i] = 0.01 * std::pow(growth, t) * std::sin(2 * std::numbers::pi * 100 * t);
  }
  AnnotatedRecording r;
  r.audio = StereoSignal(MonoSignal(x, fs), MonoSignal(x, fs));
  r.speech_intervals = {{0.0, 1.0}};
  r.angle_track = {{0.0, 0.0}};
  return r;
}

ParamSpace toy_grid(std::vector<double> lows) {
  ParamSpace s;
  s.classifier_choices = {ClassifierKind::PowerOnset};
  s.timing_choices = {WeightingKind::Phat};
  s.frame_size = GridAxis{0.1, 0.1, 0.05};
  s.step_fraction = GridAxis{1.0, 1.0, 0.1};
  s.delta_low = GridAxis{lows.front(), lows.back(), 1.0};
  s.delta_high = GridAxis{10, 10, 1};
  return s;
}

Trial surrogate(const PipelineParams& p) {
  Trial t;
  t.params = p;
  t.objective = std::pow(p.framing.frame_size_s - 0.3, 2);
  t.valid = true;
  return t;
}

}  // namespace

TEST_CASE("objective names") {
  CHECK(parse_objective("jointreg") == ObjectiveKind::JointReg);
  CHECK(parse_objective("classification") == ObjectiveKind::Classification);
  CHECK(parse_objective("doa") == ObjectiveKind::Doa);
  CHECK(parse_objective("joint") == ObjectiveKind::Joint);
  CHECK_THROWS_AS((void)parse_objective("accuracy"), InvalidArgument);
}

TEST_CASE("aggregate examples") {
  CHECK(kSigma == std::vector<int>{1, 1, 2, 2, 3, 2, 1, 3});
  std::vector<Metrics> half(8, metric(0.5, 0.1));
  CHECK(aggregate(half, kSigma, {ObjectiveKind::Classification, 0.5}, 0.4) == Approx(-0.5).epsilon(1e-12));

  std::vector<Metrics> one_hit(8, metric(0.0, 0.0));
  one_hit[4].f1 = 1.0;
  CHECK(std::abs(aggregate(one_hit, kSigma, {ObjectiveKind::Classification, 0.5}, 0.4) + 0.2) < 1e-12);

  CHECK(std::abs(aggregate(half, kSigma, {ObjectiveKind::Joint, 0.5}, 0.4) - 0.2) < 1e-12);
  CHECK(std::abs(aggregate(half, kSigma, {ObjectiveKind::JointReg, 0.5}, 0.4) - 0.4) < 1e-12);
  CHECK(std::abs(aggregate(half, kSigma, {ObjectiveKind::Doa, 0.5}, 0.4) - 0.1) < 1e-12);
  CHECK(Objective{}.lambda == 0.5);
}

TEST_CASE("aggregate penalties and errors") {
  std::vector<Metrics> ms(8, metric(0.5, 0.1));
  ms[2].f1 = 0.0;
  CHECK(aggregate(ms, kSigma, {ObjectiveKind::Joint, 0.5}, 0.4) == kPenalty);
  CHECK(aggregate(ms, kSigma, {ObjectiveKind::Doa, 0.5}, 0.4) != kPenalty);
  ms[2] = Metrics{};  // no speech windows
  CHECK(aggregate(ms, kSigma, {ObjectiveKind::Classification, 0.5}, 0.4) == kPenalty);
  CHECK_THROWS_AS((void)aggregate(ms, std::vector<int>{1, 2}, {}, 0.4), InvalidArgument);
  std::vector<int> bad = kSigma;
  bad[0] = 0;
  CHECK_THROWS_AS((void)aggregate(std::vector<Metrics>(8, metric(0.5, 0.1)), bad, {}, 0.4), InvalidArgument);
}

TEST_CASE("space validation and json round trip") {
  auto s = ParamSpace::table2_grid();
  CHECK(s.all_grid());
  CHECK(std::get<GridAxis>(s.frame_size).values().size() == 19);
  CHECK(std::get<GridAxis>(s.delta_low).values().size() == 91);
  const auto back = space_from_json(to_json(s));
  CHECK(to_json(back) == to_json(s));
  CHECK(ParamSpace::table2_tpe().all_distributions());
  s.classifier_choices.clear();
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  CHECK_THROWS_AS((void)space_from_json(nlohmann::json{{"classifier", {"srmr"}}}), InvalidArgument);
}

TEST_CASE("params and trials json round trip") {
  Trial t;
  t.index = 7;
  t.params = PipelineParams::best();
  t.params.framing.frame_size_s = 0.339;
  t.per_recording = {metric(0.8, 0.05), Metrics{}};
  t.objective = 0.123;
  t.valid = true;
  std::stringstream io;
  write_trials_jsonl(io, std::vector<Trial>{t, t});
  const auto back = read_trials_jsonl(io);
  REQUIRE(back.size() == 2);
  CHECK(back[0].index == 7);
  CHECK(back[0].params == t.params);
  CHECK(back[0].objective == 0.123);
  CHECK(back[0].per_recording.size() == 2);
  CHECK(back[0].per_recording[1].no_speech_windows);
  CHECK(params_from_json(to_json(t.params)) == t.params);
  CHECK(round_to(0.339, 0.01) == Approx(0.34));
  CHECK(round_to(0.92, 0.1) == Approx(0.9));
}

TEST_CASE("select_best tie rule and best-so-far") {
  std::vector<Trial> ts(3);
  for (auto& t : ts) {
    t.params = PipelineParams::best();
    t.objective = 1.0;
    t.valid = true;
  }
  ts[0].params.framing.frame_size_s = 0.5;
  ts[1].params.framing.frame_size_s = 0.2;
  ts[2].params.framing.frame_size_s = 0.2;
  ts[2].params.timing = WeightingKind::PlainCC;  // lexicographically smaller than Phat
  CHECK(select_best(ts) == &ts[2]);
  ts[0].objective = 0.5;
  CHECK(select_best(ts) == &ts[0]);
  CHECK(select_best(std::vector<Trial>{}) == nullptr);

  SearchResult r;
  r.trials = ts;
  r.trials[1].objective = 0.2;
  CHECK(r.best_so_far() == std::vector<double>{0.5, 0.2, 0.2});
}

TEST_CASE("grid enumeration") {
  ParamSpace s;
  s.classifier_choices = {ClassifierKind::Srmr, ClassifierKind::PowerOnset};
  s.timing_choices = {WeightingKind::Phat, WeightingKind::Scot};
  s.frame_size = GridAxis{0.2, 0.3, 0.1};
  s.step_fraction = GridAxis{0.5, 0.5, 0.1};
  s.delta_low = GridAxis{1, 1, 1};
  s.delta_high = GridAxis{5, 5, 1};
  CHECK(enumerate_grid(s).size() == 8);
  s.delta_low = GridAxis{1, 5, 1};  // 5 is not below delta_high = 5
  CHECK(enumerate_grid(s).size() == 32);
}

TEST_CASE("grid search on a toy dataset") {
  const std::vector<AnnotatedRecording> data{growing_tone(), growing_tone()};
  SUBCASE("one-point grid") {
    const auto r = grid_search(toy_grid({1.0}), Objective{ObjectiveKind::Classification, 0.5}, data, HeadModel{});
    REQUIRE(r.trials.size() == 1);
    CHECK(r.best->params == r.trials[0].params);
  }
  SUBCASE("only delta_low below the onset ratio accepts frames") {
    const auto r = grid_search(toy_grid({1.0, 3.0}), Objective{ObjectiveKind::Classification, 0.5}, data, HeadModel{});
    REQUIRE(r.trials.size() == 3);
    for (const auto& t : r.trials) {
      if (t.params.thresholds.delta_low() >= 2.0) {
        CHECK(t.objective == kPenalty);
        CHECK_FALSE(t.valid);
        CHECK(t.per_recording.size() == 1);  // stopped at the first recording
      } else {
        CHECK(t.valid);
        CHECK(t.objective < 0.0);
      }
    }
    CHECK(r.best->params.thresholds.delta_low() == 1.0);
  }
  SUBCASE("2x2x2 grid gives 8 trials and a full contour") {
    ParamSpace s = toy_grid({1.0});
    s.classifier_choices = {ClassifierKind::PowerOnset};
    s.timing_choices = {WeightingKind::Phat, WeightingKind::Scot};
    s.frame_size = GridAxis{0.1, 0.2, 0.1};
    s.step_fraction = GridAxis{0.5, 1.0, 0.5};
    const auto r = grid_search(s, Objective{ObjectiveKind::Classification, 0.5}, data, HeadModel{}, 2);
    CHECK(r.trials.size() == 8);
    const auto grid = contour_export(r.trials, "frame_size", "step_fraction", ContourStat::Min);
    CHECK(grid.x_centers.size() == 2);
    CHECK(grid.y_centers.size() == 2);
    CHECK(grid.populated() == 4);
  }
  CHECK_THROWS_AS((void)grid_search(ParamSpace::table2_tpe(), Objective{}, data, HeadModel{}), InvalidArgument);
}

TEST_CASE("tpe suggestions") {
  const auto space = ParamSpace::table2_tpe();
  TpeConfig cfg;
  SUBCASE("empty history samples the prior") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      cfg.seed = seed;
      const auto p = tpe_suggest({}, space, cfg);
      CHECK(p.thresholds.delta_low() > 0.0);
      CHECK(p.thresholds.delta_low() < p.thresholds.delta_high());
    }
  }
  SUBCASE("a dominant classifier is proposed more often") {
    std::vector<Trial> history;
    std::mt19937_64 rng(3);
    for (std::size_t i = 0; i < 40; ++i) {
      Trial t;
      t.params = sample_prior(space, rng);
      t.objective = t.params.classifier == ClassifierKind::Srmr ? 0.0 : 1.0;
      t.valid = true;
      history.push_back(t);
    }
    int srmr = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      cfg.seed = seed;
      srmr += tpe_suggest(history, space, cfg).classifier == ClassifierKind::Srmr;
    }
    CHECK(srmr > 100);
  }
  SUBCASE("grid spaces are rejected") {
    CHECK_THROWS_AS((void)tpe_suggest({}, ParamSpace::table2_grid(), cfg), InvalidArgument);
  }
  SUBCASE("config validation") {
    cfg.gamma_quantile = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.gamma_quantile = 0.25;
    cfg.n_candidates = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  }
}

TEST_CASE("tpe on the one-dimensional surrogate") {
  const auto space = ParamSpace::table2_tpe();
  std::vector<double> tpe_best, random_best;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TpeConfig cfg;
    cfg.seed = seed;
    const auto t = tpe_optimize(space, surrogate, 100, cfg);
    const auto r = random_search(space, surrogate, 100, seed);
    CHECK(std::abs(t.best->params.framing.frame_size_s - 0.3) < 0.05);
    tpe_best.push_back(t.best->objective);
    random_best.push_back(r.best->objective);
  }
  CHECK(median(tpe_best) <= median(random_best));
}

TEST_CASE("search bookkeeping") {
  const auto space = ParamSpace::table2_tpe();
  const auto empty = random_search(space, surrogate, 0, 1);
  CHECK(empty.no_trials());
  CHECK_FALSE(empty.best.has_value());
  const auto a = random_search(space, surrogate, 30, 9), b = random_search(space, surrogate, 30, 9);
  for (std::size_t i = 0; i < 30; ++i) CHECK(a.trials[i].params == b.trials[i].params);
  TpeConfig cfg;
  cfg.seed = 4;
  const auto long_run = tpe_optimize(space, surrogate, 1000, cfg);
  const auto trace = long_run.best_so_far();
  CHECK(trace.size() == 1000);
  CHECK(std::is_sorted(trace.rbegin(), trace.rend()));
}

TEST_CASE("contour export") {
  const auto space = ParamSpace::table2_tpe();
  const auto one = random_search(space, surrogate, 1, 2);
  const auto g1 = contour_export(one.trials, "frame_size", "step_fraction", ContourStat::Mean);
  CHECK(g1.populated() == 1);

  TpeConfig cfg;
  const auto run = tpe_optimize(space, surrogate, 150, cfg);
  const auto g = contour_export(run.trials, "frame_size", "step_fraction", ContourStat::Min);
  CHECK(g.cells.size() == 400);
  CHECK(g.populated() < 400);
  std::ostringstream csv;
  write_contour_csv(csv, g);
  CHECK(csv.str().rfind("frame_size,step_fraction,count,objective\n", 0) == 0);
  CHECK(csv.str().find(",0,\n") != std::string::npos);  // empty cell

  CHECK_THROWS_AS((void)contour_export(run.trials, "frame_size", "colour", ContourStat::Min), InvalidArgument);
  CHECK_THROWS_AS((void)parameter_value(PipelineParams::best(), "timing"), InvalidArgument);
  CHECK(parameter_value(PipelineParams::best(), "delta_high") == 7.0);
}
