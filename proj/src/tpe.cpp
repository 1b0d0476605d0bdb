#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <variant>

#include "doalab/errors.hpp"
#include "doalab/param_opt.hpp"
#include "param_support.hpp"

namespace doalab {
namespace {

using detail::Dim;
using detail::Support;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Truncated Gaussian density on (lo, hi].
double truncated_normal_pdf(double x, double mean, double sd, Support s) {
  if (!(x > s.lo && x <= s.hi)) return 0.0;
  const double mass = normal_cdf((s.hi - mean) / sd) - normal_cdf((s.lo - mean) / sd);
  const double z = (x - mean) / sd;
  const double pdf = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
  return mass > 1e-300 ? pdf / mass : 0.0;
}

/// Support of a dimension intersected with its prior range.
Support effective_support(const NumericDim& d, Dim dim) {
  Support s = detail::support_of(dim);
  if (const auto* u = std::get_if<UniformDist>(&d)) {
    s.lo = std::max(s.lo, std::nextafter(u->min, -std::numeric_limits<double>::infinity()));
    s.hi = std::min(s.hi, u->max);
  }
  return s;
}

double prior_range(const NumericDim& d) {
  if (const auto* u = std::get_if<UniformDist>(&d)) return u->max - u->min;
  const auto& n = std::get<NormalDist>(d);
  return 6.0 * n.std;
}

double prior_pdf(const NumericDim& d, Support s, double x) {
  if (const auto* u = std::get_if<UniformDist>(&d)) {
    return (x >= u->min && x <= u->max) ? 1.0 / (u->max - u->min) : 0.0;
  }
  const auto& n = std::get<NormalDist>(d);
  return truncated_normal_pdf(x, n.mean, n.std, s);
}

/// Parzen estimator over one numeric dimension.
struct Parzen {
  std::vector<double> centers;
  double bandwidth = 1.0;
  Support support{};
  const NumericDim* prior = nullptr;

  Parzen(std::vector<double> obs, const NumericDim& d, Dim dim)
      : centers(std::move(obs)), support(effective_support(d, dim)), prior(&d) {
    const double range = prior_range(d);
    const double n = std::max<double>(1.0, static_cast<double>(centers.size()));
    bandwidth = std::max(range / n, 0.01 * range);
  }

  [[nodiscard]] double pdf(double x) const {
    if (centers.empty()) return prior_pdf(*prior, support, x);
    double acc = 0.0;
    for (double c : centers) acc += truncated_normal_pdf(x, c, bandwidth, support);
    return acc / static_cast<double>(centers.size());
  }

  [[nodiscard]] double sample(std::mt19937_64& rng) const {
    if (centers.empty()) return detail::sample_dim(*prior, support, rng);
    std::uniform_int_distribution<std::size_t> pick(0, centers.size() - 1);
    return detail::sample_truncated_normal(centers[pick(rng)], bandwidth, support, rng);
  }
};

template <typename T>
struct Categorical {
  std::vector<T> choices;
  std::vector<double> probs;

  Categorical(const std::vector<T>& all, const std::vector<T>& obs) : choices(all) {
    const double denom = static_cast<double>(obs.size() + all.size());
    for (const T& c : all) {
      const auto count = std::count(obs.begin(), obs.end(), c);
      probs.push_back((static_cast<double>(count) + 1.0) / denom);
    }
  }

  [[nodiscard]] double prob(T v) const {
    for (std::size_t i = 0; i < choices.size(); ++i) {
      if (choices[i] == v) return probs[i];
    }
    return 0.0;
  }

  [[nodiscard]] T sample(std::mt19937_64& rng) const {
    std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
    return choices[pick(rng)];
  }
};

struct Model {
  Categorical<ClassifierKind> classifier;
  Categorical<WeightingKind> timing;
  std::vector<Parzen> numeric;  // indexed like detail::kNumericDims

  Model(const ParamSpace& space, const std::vector<const Trial*>& obs)
      : classifier(space.classifier_choices, collect<ClassifierKind>(obs, [](const Trial* t) {
                     return t->params.classifier;
                   })),
        timing(space.timing_choices,
               collect<WeightingKind>(obs, [](const Trial* t) { return t->params.timing; })) {
    for (Dim dim : detail::kNumericDims) {
      std::vector<double> values;
      for (const Trial* t : obs) values.push_back(detail::get(t->params, dim));
      numeric.emplace_back(std::move(values), detail::dim_of(space, dim), dim);
    }
  }

  template <typename T, typename F>
  static std::vector<T> collect(const std::vector<const Trial*>& obs, F f) {
    std::vector<T> out;
    for (const Trial* t : obs) out.push_back(f(t));
    return out;
  }

  [[nodiscard]] double log_density(const PipelineParams& p) const {
    double acc = std::log(classifier.prob(p.classifier)) + std::log(timing.prob(p.timing));
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      acc += std::log(numeric[k].pdf(detail::get(p, detail::kNumericDims[k])));
    }
    return acc;
  }

  [[nodiscard]] PipelineParams sample(std::mt19937_64& rng) const {
    PipelineParams p;
    p.classifier = classifier.sample(rng);
    p.timing = timing.sample(rng);
    p.framing.frame_size_s = numeric[0].sample(rng);
    p.framing.step_fraction = numeric[1].sample(rng);
    const auto [lo, hi] = detail::ordered_thresholds(
        [&] { return std::make_pair(numeric[2].sample(rng), numeric[3].sample(rng)); });
    p.thresholds = Thresholds(lo, hi);
    return p;
  }
};

}  // namespace

void TpeConfig::validate() const {
  if (!(gamma_quantile > 0.0 && gamma_quantile < 1.0)) {
    throw InvalidArgument("TPE gamma must lie in (0, 1)");
  }
  if (n_candidates == 0) throw InvalidArgument("TPE needs at least one candidate per step");
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t trial_index) {
  const auto idx = static_cast<std::uint64_t>(trial_index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32),
                    0x7e5u};
  return std::mt19937_64(seq);
}

PipelineParams tpe_suggest(std::span<const Trial> history, const ParamSpace& space,
                           const TpeConfig& config) {
  config.validate();
  space.validate();
  if (!space.all_distributions()) {
    throw InvalidArgument("TPE needs distribution-form numeric dimensions, not grids");
  }
  auto rng = trial_rng(config.seed, history.size());

  std::vector<const Trial*> observed;
  for (const auto& t : history) {
    if (std::isfinite(t.objective)) observed.push_back(&t);
  }
  if (observed.size() < std::max<std::size_t>(config.n_startup, 1)) return sample_prior(space, rng);

  std::stable_sort(observed.begin(), observed.end(),
                   [](const Trial* a, const Trial* b) { return a->objective < b->objective; });
  const auto n_good = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(config.gamma_quantile * static_cast<double>(observed.size()))));
  const std::vector<const Trial*> good(observed.begin(), observed.begin() + static_cast<std::ptrdiff_t>(n_good));
  const std::vector<const Trial*> bad(observed.begin() + static_cast<std::ptrdiff_t>(n_good), observed.end());

  const Model l(space, good);
  const Model g(space, bad);

  PipelineParams best;
  double best_score = -std::numeric_limits<double>::infinity();
  bool have = false;
  for (std::size_t c = 0; c < config.n_candidates; ++c) {
    PipelineParams cand = l.sample(rng);
    const double score = l.log_density(cand) - g.log_density(cand);
    if (!have || score > best_score) {
      best = cand;
      best_score = score;
      have = true;
    }
  }
  return best;
}

}  // namespace doalab
