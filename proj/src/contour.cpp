#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "doalab/annotation_io.hpp"
#include "doalab/errors.hpp"
#include "doalab/param_opt.hpp"

namespace doalab {
namespace {

struct Binning {
  std::vector<double> centers;
  std::vector<double> distinct;  // non-empty when binning by exact value
  double lo = 0.0;
  double width = 1.0;

  [[nodiscard]] std::size_t index(double v) const {
    if (!distinct.empty()) {
      auto it = std::lower_bound(distinct.begin(), distinct.end(), v);
      return static_cast<std::size_t>(it - distinct.begin());
    }
    const auto n = centers.size();
    const double pos = (v - lo) / width;
    if (pos <= 0.0) return 0;
    return std::min(n - 1, static_cast<std::size_t>(pos));
  }
};

Binning make_binning(std::vector<double> values, std::size_t bins) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  Binning b;
  if (values.size() <= bins) {
    b.distinct = values;
    b.centers = values;
    return b;
  }
  b.lo = values.front();
  b.width = (values.back() - values.front()) / static_cast<double>(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    b.centers.push_back(b.lo + (static_cast<double>(i) + 0.5) * b.width);
  }
  return b;
}

}  // namespace

std::size_t ContourGrid::populated() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const ContourCell& c) { return c.value.has_value(); }));
}

double parameter_value(const PipelineParams& params, std::string_view name) {
  if (name == "frame_size" || name == "frame_size_s") return params.framing.frame_size_s;
  if (name == "step_fraction" || name == "step") return params.framing.step_fraction;
  if (name == "delta_low") return params.thresholds.delta_low();
  if (name == "delta_high") return params.thresholds.delta_high();
  throw InvalidArgument("unknown numeric parameter '" + std::string(name) + "'");
}

ContourGrid contour_export(std::span<const Trial> trials, std::string_view x_axis,
                           std::string_view y_axis, ContourStat stat, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("contour needs at least one bin per axis");
  // Validate the names even when there is nothing to bin.
  const PipelineParams probe;
  (void)parameter_value(probe, x_axis);
  (void)parameter_value(probe, y_axis);

  ContourGrid grid;
  grid.x_axis = std::string(x_axis);
  grid.y_axis = std::string(y_axis);

  std::vector<const Trial*> valid;
  for (const auto& t : trials) {
    if (t.valid && std::isfinite(t.objective)) valid.push_back(&t);
  }
  if (valid.empty()) return grid;

  std::vector<double> xs, ys;
  for (const Trial* t : valid) {
    xs.push_back(parameter_value(t->params, x_axis));
    ys.push_back(parameter_value(t->params, y_axis));
  }
  const Binning bx = make_binning(xs, bins);
  const Binning by = make_binning(ys, bins);
  grid.x_centers = bx.centers;
  grid.y_centers = by.centers;

  const std::size_t nx = bx.centers.size();
  const std::size_t ny = by.centers.size();
  std::vector<double> acc(nx * ny, 0.0);
  grid.cells.resize(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      grid.cells[j * nx + i].x = bx.centers[i];
      grid.cells[j * nx + i].y = by.centers[j];
    }
  }
  for (std::size_t k = 0; k < valid.size(); ++k) {
    const std::size_t cell = by.index(ys[k]) * nx + bx.index(xs[k]);
    auto& c = grid.cells[cell];
    const double v = valid[k]->objective;
    c.count += 1;
    acc[cell] = (c.count == 1) ? v : (stat == ContourStat::Min ? std::min(acc[cell], v) : acc[cell] + v);
  }
  for (std::size_t cell = 0; cell < grid.cells.size(); ++cell) {
    auto& c = grid.cells[cell];
    if (c.count == 0) continue;
    c.value = stat == ContourStat::Min ? acc[cell] : acc[cell] / static_cast<double>(c.count);
  }
  return grid;
}

void write_contour_csv(std::ostream& out, const ContourGrid& grid) {
  out << grid.x_axis << ',' << grid.y_axis << ",count,objective\n";
  for (const auto& c : grid.cells) {
    out << io::format_double(c.x) << ',' << io::format_double(c.y) << ',' << c.count << ',';
    if (c.value) out << io::format_double(*c.value);
    out << '\n';
  }
}

double round_to(double value, double quantum) {
  if (!(quantum > 0.0) || !std::isfinite(value)) throw InvalidArgument("round_to: bad arguments");
  const double r = std::round(value / quantum) * quantum;
  return std::round(r * 1e10) / 1e10;
}

}  // namespace doalab
