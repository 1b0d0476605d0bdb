#include "doalab/tde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "doalab/errors.hpp"
#include "fft_backend.hpp"

namespace doalab {

std::string_view to_string(WeightingKind kind) {
  switch (kind) {
    case WeightingKind::PlainCC: return "cc";
    case WeightingKind::Phat: return "phat";
    case WeightingKind::Scot: return "scot";
  }
  return "?";
}

WeightingKind parse_weighting(std::string_view name) {
  if (name == "cc" || name == "cross-corr" || name == "plaincc" || name == "plain_cc") {
    return WeightingKind::PlainCC;
  }
  if (name == "phat" || name == "gcc-phat") return WeightingKind::Phat;
  if (name == "scot" || name == "gcc-scot") return WeightingKind::Scot;
  throw InvalidArgument("unknown timing method '" + std::string(name) + "'");
}

std::vector<std::complex<double>> cross_power_spectrum(const Spectrum& x, const Spectrum& y) {
  if (x.bins.size() != y.bins.size() || x.length != y.length) {
    throw InvalidArgument("cross_power_spectrum: spectrum lengths differ");
  }
  if (x.sample_rate != y.sample_rate) {
    throw InvalidArgument("cross_power_spectrum: sample rates differ");
  }
  std::vector<std::complex<double>> g(x.bins.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = x.bins[k] * std::conj(y.bins[k]);
  return g;
}

namespace {

void weight_in_place(std::span<std::complex<double>> g, std::span<const double> g_xx,
                     std::span<const double> g_yy, WeightingKind kind, double epsilon) {
  switch (kind) {
    case WeightingKind::PlainCC:
      return;
    case WeightingKind::Phat:
      for (auto& v : g) v /= std::max(std::sqrt(std::norm(v)), epsilon);
      return;
    case WeightingKind::Scot:
      if (g_xx.size() != g.size() || g_yy.size() != g.size()) {
        throw InvalidArgument("apply_weighting: auto-spectra length mismatch");
      }
      for (std::size_t k = 0; k < g.size(); ++k) {
        g[k] /= std::max(std::sqrt(g_xx[k] * g_yy[k]), epsilon);
      }
      return;
  }
}

// Centered moving average over a one-sided spectrum, mirrored at both ends (the two-sided
// auto-spectrum is even, so this equals circular smoothing of the full spectrum).
std::vector<double> smooth_one_sided(const std::vector<double>& p, std::size_t half_width) {
  if (half_width == 0 || p.size() < 2) return p;
  const long n = static_cast<long>(p.size());
  const long w = static_cast<long>(half_width);
  auto mirror = [n](long i) {
    const long period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
  };
  auto at = [&](long i) { return p[static_cast<std::size_t>(mirror(i))]; };
  std::vector<double> out(p.size());
  double acc = 0.0;
  for (long j = -w; j <= w; ++j) acc += at(j);
  const double inv = 1.0 / static_cast<double>(2 * w + 1);
  for (long k = 0; k < n; ++k) {
    out[static_cast<std::size_t>(k)] = acc * inv;
    acc += at(k + w + 1) - at(k - w);
  }
  return out;
}

bool all_zero(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
}

}  // namespace

std::vector<std::complex<double>> apply_weighting(std::span<const std::complex<double>> g_xy,
                                                  std::span<const double> g_xx,
                                                  std::span<const double> g_yy, WeightingKind kind,
                                                  double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("apply_weighting: epsilon must be positive");
  std::vector<std::complex<double>> out(g_xy.begin(), g_xy.end());
  weight_in_place(out, g_xx, g_yy, kind, epsilon);
  return out;
}

TdeResult pick_peak(const CrossCorrelogram& c) {
  if (c.values.empty()) throw InvalidArgument("pick_peak: empty correlogram");
  std::size_t best = 0;
  for (std::size_t i = 1; i < c.values.size(); ++i) {
    const double v = c.values[i];
    const double b = c.values[best];
    const long lag = c.lag_of(i);
    const long best_lag = c.lag_of(best);
    if (v > b || (v == b && (std::labs(lag) < std::labs(best_lag) ||
                             (std::labs(lag) == std::labs(best_lag) && lag > best_lag)))) {
      best = i;
    }
  }
  TdeResult r;
  r.lag_samples = c.lag_of(best);
  r.lag_seconds = static_cast<double>(r.lag_samples) / c.sample_rate;
  r.peak_value = c.values[best];
  r.prominence = c.values.size() >= 3 ? peak_prominence(c) : std::numeric_limits<double>::infinity();
  return r;
}

double peak_prominence(const CrossCorrelogram& c) {
  const auto& v = c.values;
  if (v.size() < 3) throw InvalidArgument("peak_prominence: need at least 3 lags");
  const auto top = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  double competitor = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const auto dist = i > top ? i - top : top - i;
    if (dist < 2) continue;
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) competitor = std::max(competitor, v[i]);
  }
  if (!(competitor > 0.0)) return std::numeric_limits<double>::infinity();
  return v[top] / competitor;
}

GccOutput gcc(std::span<const double> left, std::span<const double> right, double sample_rate,
              WeightingKind kind, std::size_t max_lag, const GccOptions& options) {
  const std::size_t n = left.size();
  if (right.size() != n) throw InvalidArgument("gcc: frame lengths differ");
  if (max_lag < 1 || max_lag >= n) throw InvalidArgument("gcc: max_lag must be in [1, frame length)");
  if (all_zero(left) || all_zero(right)) throw SilentFrame();

  const std::size_t m = options.zero_pad ? detail::fast_length(2 * n) : n;
  std::vector<double> xbuf(m, 0.0);
  std::vector<double> ybuf(m, 0.0);
  std::copy(left.begin(), left.end(), xbuf.begin());
  std::copy(right.begin(), right.end(), ybuf.begin());

  const std::size_t half = m / 2 + 1;
  std::vector<std::complex<double>> xs(half);
  std::vector<std::complex<double>> ys(half);
  detail::rfft(xbuf, xs);
  detail::rfft(ybuf, ys);

  std::vector<std::complex<double>> g(half);
  double g_max = 0.0;
  for (std::size_t k = 0; k < half; ++k) {
    g[k] = xs[k] * std::conj(ys[k]);
    g_max = std::max(g_max, std::norm(g[k]));
  }
  if (g_max == 0.0) throw SilentFrame();
  g_max = std::sqrt(g_max);

  std::vector<double> gxx;
  std::vector<double> gyy;
  double scale = g_max;
  if (kind == WeightingKind::Scot) {
    gxx.resize(half);
    gyy.resize(half);
    for (std::size_t k = 0; k < half; ++k) {
      gxx[k] = std::norm(xs[k]);
      gyy[k] = std::norm(ys[k]);
    }
    const auto width = static_cast<std::size_t>(
        std::llround(static_cast<double>(options.scot_smoothing_bins) * static_cast<double>(m) / static_cast<double>(n)));
    gxx = smooth_one_sided(gxx, width);
    gyy = smooth_one_sided(gyy, width);
    scale = 0.0;
    for (std::size_t k = 0; k < half; ++k) scale = std::max(scale, std::sqrt(gxx[k] * gyy[k]));
  }
  weight_in_place(g, gxx, gyy, kind, options.relative_epsilon * scale);

  std::vector<double> r(m);
  detail::irfft(g, r);

  // r[j] = sum_n x[n + j] y[n]; the left-leads lag l corresponds to j = -l.
  CrossCorrelogram c;
  c.max_lag = std::min((m - 1) / 2, n - 1);
  c.sample_rate = sample_rate;
  c.values.resize(2 * c.max_lag + 1);
  const double norm = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    const long lag = c.lag_of(i);
    const long j = ((-lag) % static_cast<long>(m) + static_cast<long>(m)) % static_cast<long>(m);
    c.values[i] = r[static_cast<std::size_t>(j)] * norm;
  }

  // The peak is searched in the feasible window, prominence is judged on the whole correlogram.
  const std::size_t window = std::min(max_lag, c.max_lag);
  CrossCorrelogram feasible;
  feasible.max_lag = window;
  feasible.sample_rate = sample_rate;
  const auto first = c.values.begin() + static_cast<std::ptrdiff_t>(c.max_lag - window);
  feasible.values.assign(first, first + static_cast<std::ptrdiff_t>(2 * window + 1));
  TdeResult res = pick_peak(feasible);
  res.prominence = peak_prominence(c);
  return GccOutput{std::move(c), res};
}

GccOutput gcc(const MonoSignal& left, const MonoSignal& right, WeightingKind kind,
              std::size_t max_lag, const GccOptions& options) {
  if (left.sample_rate() != right.sample_rate()) throw InvalidArgument("gcc: sample rates differ");
  return gcc(left.samples(), right.samples(), left.sample_rate(), kind, max_lag, options);
}

CrossCorrelogram time_domain_xcorr(const MonoSignal& left, const MonoSignal& right,
                                   std::size_t max_lag) {
  if (left.size() != right.size()) throw InvalidArgument("time_domain_xcorr: lengths differ");
  const auto x = left.samples();
  const auto y = right.samples();
  const long n = static_cast<long>(x.size());
  CrossCorrelogram c;
  c.max_lag = max_lag;
  c.sample_rate = left.sample_rate();
  c.values.assign(2 * max_lag + 1, 0.0);
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    const long lag = c.lag_of(i);
    double acc = 0.0;
    for (long t = std::max(0L, -lag); t < n && t + lag < n; ++t) {
      acc += x[static_cast<std::size_t>(t)] * y[static_cast<std::size_t>(t + lag)];
    }
    c.values[i] = acc;
  }
  return c;
}

}  // namespace doalab
