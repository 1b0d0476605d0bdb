#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "doalab/errors.hpp"
#include "doalab/param_opt.hpp"
#include "doalab/thread_pool.hpp"
#include "param_support.hpp"

namespace doalab {

std::vector<double> SearchResult::best_so_far() const {
  std::vector<double> out;
  out.reserve(trials.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : trials) {
    best = std::min(best, t.objective);
    out.push_back(best);
  }
  return out;
}

const Trial* select_best(std::span<const Trial> trials) {
  const Trial* best = nullptr;
  for (const auto& t : trials) {
    if (best == nullptr) {
      best = &t;
      continue;
    }
    if (t.objective < best->objective) {
      best = &t;
    } else if (t.objective == best->objective) {
      const double fa = t.params.framing.frame_size_s;
      const double fb = best->params.framing.frame_size_s;
      if (fa < fb || (fa == fb && compare(t.params, best->params) < 0)) best = &t;
    }
  }
  return best;
}

std::vector<PipelineParams> enumerate_grid(const ParamSpace& space) {
  space.validate();
  if (!space.all_grid()) throw InvalidArgument("grid search needs grid-form numeric dimensions");
  const auto frames = std::get<GridAxis>(space.frame_size).values();
  const auto steps = std::get<GridAxis>(space.step_fraction).values();
  const auto lows = std::get<GridAxis>(space.delta_low).values();
  const auto highs = std::get<GridAxis>(space.delta_high).values();
  std::vector<PipelineParams> out;
  for (auto c : space.classifier_choices) {
    for (auto t : space.timing_choices) {
      for (double f : frames) {
        for (double s : steps) {
          for (double lo : lows) {
            for (double hi : highs) {
              if (!(lo > 0.0 && lo < hi)) continue;
              out.push_back(PipelineParams{c, t, FramingParams{f, s}, Thresholds(lo, hi)});
            }
          }
        }
      }
    }
  }
  return out;
}

namespace {

SearchResult finish(std::vector<Trial> trials) {
  SearchResult r;
  for (std::size_t i = 0; i < trials.size(); ++i) trials[i].index = i;
  r.trials = std::move(trials);
  if (const Trial* b = select_best(r.trials)) r.best = *b;
  return r;
}

}  // namespace

SearchResult grid_search(const ParamSpace& space, DatasetEvaluator& evaluator, unsigned threads) {
  const auto grid = enumerate_grid(space);

  // Points sharing (classifier, timing, framing) reuse one frame analysis per recording.
  struct Group {
    std::vector<std::size_t> members;
  };
  std::vector<Group> groups;
  std::map<std::tuple<int, int, double, double>, std::size_t> group_of;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& p = grid[i];
    const auto key = std::make_tuple(static_cast<int>(p.classifier), static_cast<int>(p.timing),
                                     p.framing.frame_size_s, p.framing.step_fraction);
    auto [it, inserted] = group_of.emplace(key, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].members.push_back(i);
  }

  std::vector<Trial> trials(grid.size());
  parallel_for(
      groups.size(),
      [&](std::size_t g) {
        const auto& members = groups[g].members;
        const auto& first = grid[members.front()];
        std::vector<Thresholds> th;
        th.reserve(members.size());
        for (auto i : members) th.push_back(grid[i].thresholds);
        auto results = evaluator.evaluate_thresholds(first.classifier, first.timing, first.framing, th);
        for (std::size_t k = 0; k < members.size(); ++k) trials[members[k]] = std::move(results[k]);
      },
      threads);
  return finish(std::move(trials));
}

SearchResult grid_search(const ParamSpace& space, const Objective& objective,
                         std::span<const AnnotatedRecording> dataset, const HeadModel& model,
                         unsigned threads) {
  DatasetEvaluator evaluator(dataset, model, objective);
  return grid_search(space, evaluator, threads);
}

SearchResult tpe_optimize(const ParamSpace& space, const TrialFunction& evaluate, std::size_t n_trials,
                          const TpeConfig& config) {
  std::vector<Trial> history;
  history.reserve(n_trials);
  for (std::size_t i = 0; i < n_trials; ++i) {
    const auto params = tpe_suggest(history, space, config);
    Trial t = evaluate(params);
    t.params = params;
    t.index = i;
    history.push_back(std::move(t));
  }
  return finish(std::move(history));
}

SearchResult tpe_optimize(const ParamSpace& space, const Objective& objective,
                          std::span<const AnnotatedRecording> dataset, const HeadModel& model,
                          std::size_t n_trials, const TpeConfig& config) {
  DatasetEvaluator evaluator(dataset, model, objective);
  return tpe_optimize(space, evaluator.as_function(), n_trials, config);
}

SearchResult random_search(const ParamSpace& space, const TrialFunction& evaluate, std::size_t n_trials,
                           std::uint64_t seed) {
  space.validate();
  std::vector<Trial> trials;
  trials.reserve(n_trials);
  for (std::size_t i = 0; i < n_trials; ++i) {
    auto rng = trial_rng(seed, i);
    const auto params = sample_prior(space, rng);
    Trial t = evaluate(params);
    t.params = params;
    t.index = i;
    trials.push_back(std::move(t));
  }
  return finish(std::move(trials));
}

SearchResult random_search(const ParamSpace& space, const Objective& objective,
                           std::span<const AnnotatedRecording> dataset, const HeadModel& model,
                           std::size_t n_trials, std::uint64_t seed) {
  DatasetEvaluator evaluator(dataset, model, objective);
  return random_search(space, evaluator.as_function(), n_trials, seed);
}

}  // namespace doalab
