#include "lanepareto/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "lanepareto/errors.h"

namespace lanepareto {
namespace {

bool CountsAsTraffic(const VehicleState& s) {
  return s.kind != VehicleKind::kIncident;
}

// Liang-Barsky clip of the segment (t0, x0) -> (t1, x1); returns the kept
// parameter interval, or nothing when the segment misses the rectangle.
std::optional<std::pair<double, double>> Clip(double t0, double x0, double t1,
                                              double x1, const EdieRegion& r) {
  double lo = 0.0, hi = 1.0;
  const double dt = t1 - t0, dx = x1 - x0;
  const double p[4] = {-dt, dt, -dx, dx};
  const double q[4] = {t0 - r.t_min, r.t_max - t0, x0 - r.x_min, r.x_max - x0};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return std::nullopt;
      continue;
    }
    const double u = q[i] / p[i];
    if (p[i] < 0.0) {
      lo = std::max(lo, u);
    } else {
      hi = std::min(hi, u);
    }
  }
  if (lo >= hi) return std::nullopt;
  return std::make_pair(lo, hi);
}

std::string Color(VehicleKind kind) {
  switch (kind) {
    case VehicleKind::kHuman:
      return "#e08a1e";
    case VehicleKind::kAutonomous:
      return "#2a6fbb";
    case VehicleKind::kLaneChanger:
      return "#c62828";
    case VehicleKind::kIncident:
      return "#555555";
  }
  return "#000000";
}

// Red (slow) to green (fast).
std::string SpeedColor(double v, double v_max) {
  const double f = std::clamp(v_max > 0.0 ? v / v_max : 0.0, 0.0, 1.0);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x40",
                static_cast<int>(std::lround(220 * (1.0 - f))),
                static_cast<int>(std::lround(40 + 170 * f)));
  return buf;
}

}  // namespace

void Validate(const EdieRegion& r) {
  if (!(r.x_max > r.x_min)) throw ConfigError("edie_region.length", "must be positive");
  if (!(r.t_max > r.t_min)) throw ConfigError("edie_region.duration", "must be positive");
}

EdieRegion RegionFor(const SimulationTrace& trace, const EdieRegionSpec& spec) {
  const double x_lc = trace.ticks.at(trace.k0).at(trace.lc_index).x;
  const double t0 = trace.time(trace.k0);
  EdieRegion r;
  r.x_min = x_lc + spec.x_offset;
  r.x_max = r.x_min + spec.length;
  r.t_min = t0 + spec.t_offset;
  r.t_max = r.t_min + spec.duration;
  return r;
}

EdieMetrics EdieFromTotals(double distance, double time, double area) {
  if (!(area > 0.0)) throw Error("region area must be positive");
  EdieMetrics m;
  m.distance = distance;
  m.time = time;
  m.area = area;
  m.flow = distance / area * 3600.0;
  m.density = time / area * 1000.0;
  m.speed = time > 0.0 ? distance / time : 0.0;
  return m;
}

std::vector<RegionRow> PerVehicleRegionTable(const SimulationTrace& trace,
                                             const EdieRegion& region) {
  Validate(region);
  if (trace.ticks.empty()) throw Error("empty trace");
  const double eps = 1e-9;
  const double first = trace.time(0);
  const double last = trace.time(static_cast<int>(trace.ticks.size()) - 1);
  if (region.t_min < first - eps || region.t_max > last + eps) {
    throw Error("region time span lies outside the trace");
  }

  const std::size_t n = trace.ticks.front().size();
  std::vector<RegionRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (!CountsAsTraffic(trace.ticks.front()[i])) continue;
    double distance = 0.0, time = 0.0;
    for (std::size_t k = 0; k + 1 < trace.ticks.size(); ++k) {
      const double t0 = trace.time(static_cast<int>(k));
      const double t1 = trace.time(static_cast<int>(k + 1));
      const double x0 = trace.ticks[k][i].x, x1 = trace.ticks[k + 1][i].x;
      const auto kept = Clip(t0, x0, t1, x1, region);
      if (!kept) continue;
      const double share = kept->second - kept->first;
      distance += std::abs(x1 - x0) * share;
      time += (t1 - t0) * share;
    }
    if (time <= 0.0) continue;
    rows.push_back({trace.ticks.front()[i].id,
                    std::string(ToString(trace.ticks.front()[i].kind)),
                    distance, time});
  }
  return rows;
}

EdieMetrics ComputeEdieMetrics(const SimulationTrace& trace,
                               const EdieRegion& region) {
  double d = 0.0, t = 0.0;
  for (const RegionRow& row : PerVehicleRegionTable(trace, region)) {
    d += row.distance;
    t += row.time;
  }
  return EdieFromTotals(d, t, region.area());
}

HeatmapGrid BuildHeatmap(const SimulationTrace& trace, double dx, double dt,
                         const std::optional<HeatmapWindow>& window) {
  if (!(dx > 0.0)) throw ConfigError("heatmap.dx", "must be positive");
  if (!(dt > 0.0)) throw ConfigError("heatmap.dt", "must be positive");
  HeatmapGrid g;
  g.dx = dx;
  g.dt = dt;

  HeatmapWindow w;
  if (window) {
    w = *window;
  } else {
    if (trace.ticks.empty()) return g;
    w.x_min = std::numeric_limits<double>::infinity();
    w.x_max = -w.x_min;
    for (const auto& snap : trace.ticks) {
      for (const auto& s : snap) {
        if (!CountsAsTraffic(s)) continue;
        w.x_min = std::min(w.x_min, s.x);
        w.x_max = std::max(w.x_max, s.x);
      }
    }
    if (!std::isfinite(w.x_min)) return g;
    w.t_min = trace.time(0);
    w.t_max = trace.time(static_cast<int>(trace.ticks.size()) - 1);
    // Make the upper edges inclusive.
    w.x_max += 1e-9 * std::max(1.0, std::abs(w.x_max));
    w.t_max += 1e-9 * std::max(1.0, std::abs(w.t_max));
  }
  g.x_min = w.x_min;
  g.t_min = w.t_min;
  g.nx = std::max(1, static_cast<int>(std::ceil((w.x_max - w.x_min) / dx - 1e-9)));
  g.nt = std::max(1, static_cast<int>(std::ceil((w.t_max - w.t_min) / dt - 1e-9)));
  const std::size_t cells = static_cast<std::size_t>(g.nx) * g.nt;
  std::vector<double> sum(cells, 0.0);
  g.count.assign(cells, 0);
  g.mean.assign(cells, std::nullopt);

  for (std::size_t k = 0; k < trace.ticks.size(); ++k) {
    const double t = trace.time(static_cast<int>(k));
    if (t < w.t_min || t >= w.t_max) continue;
    const int it = std::min(g.nt - 1, static_cast<int>((t - w.t_min) / dt));
    for (const auto& s : trace.ticks[k]) {
      if (!CountsAsTraffic(s) || s.x < w.x_min || s.x >= w.x_max) continue;
      const int ix = std::min(g.nx - 1, static_cast<int>((s.x - w.x_min) / dx));
      const std::size_t c = static_cast<std::size_t>(it) * g.nx + ix;
      sum[c] += s.v;
      ++g.count[c];
    }
  }
  for (std::size_t c = 0; c < cells; ++c) {
    if (g.count[c] > 0) g.mean[c] = sum[c] / g.count[c];
  }
  return g;
}

std::string EdieToJson(const EdieMetrics& m, const EdieRegion& r) {
  nlohmann::ordered_json j;
  j["region"] = {{"x_min", r.x_min}, {"x_max", r.x_max},
                 {"t_min", r.t_min}, {"t_max", r.t_max},
                 {"area_m_s", m.area}};
  j["distance_m"] = m.distance;
  j["time_s"] = m.time;
  j["flow_veh_per_h"] = m.flow;
  j["speed_m_per_s"] = m.speed;
  j["density_veh_per_km"] = m.density;
  return j.dump(2);
}

std::string RegionTableToCsv(const std::vector<RegionRow>& rows) {
  std::ostringstream out;
  out << "vehicle_id,kind,distance_m,time_s\n";
  char line[128];
  double d = 0.0, t = 0.0;
  for (const RegionRow& r : rows) {
    std::snprintf(line, sizeof(line), "%d,%s,%.2f,%.2f\n", r.vehicle_id,
                  r.kind.c_str(), r.distance, r.time);
    out << line;
    d += r.distance;
    t += r.time;
  }
  std::snprintf(line, sizeof(line), "total,,%.2f,%.2f\n", d, t);
  out << line;
  return out.str();
}

std::string HeatmapToCsv(const HeatmapGrid& g) {
  std::ostringstream out;
  out << "t,x,speed\n";
  char line[128];
  for (int it = 0; it < g.nt; ++it) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const auto& m = g.at(it, ix);
      if (!m) continue;
      std::snprintf(line, sizeof(line), "%.3f,%.3f,%.4f\n",
                    g.t_min + (it + 0.5) * g.dt, g.x_min + (ix + 0.5) * g.dx, *m);
      out << line;
    }
  }
  return out.str();
}

std::string RenderSvg(const SimulationTrace& trace, const HeatmapGrid& grid,
                      const EdieRegion& region) {
  constexpr double kWidth = 900, kPanel = 360, kMargin = 50;
  std::ostringstream svg;
  svg.setf(std::ios::fixed);
  svg.precision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << 2 * kPanel + 3 * kMargin << "\" font-family=\"sans-serif\" "
      << "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (trace.ticks.empty()) {
    svg << "</svg>\n";
    return svg.str();
  }

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double v_hi = 0.0;
  for (const auto& snap : trace.ticks) {
    for (const auto& s : snap) {
      if (!CountsAsTraffic(s)) continue;
      x_lo = std::min(x_lo, s.x);
      x_hi = std::max(x_hi, s.x);
      v_hi = std::max(v_hi, s.v);
    }
  }
  const double t_lo = trace.time(0);
  const double t_hi = trace.time(static_cast<int>(trace.ticks.size()) - 1);
  const double plot_w = kWidth - 2 * kMargin;
  auto px = [&](double t) {
    return kMargin + (t - t_lo) / std::max(t_hi - t_lo, 1e-9) * plot_w;
  };
  auto py = [&](double x, double top) {
    return top + kPanel - (x - x_lo) / std::max(x_hi - x_lo, 1e-9) * kPanel;
  };

  // Trajectory panel.
  const double top1 = kMargin;
  svg << "<text x=\"" << kMargin << "\" y=\"" << top1 - 10
      << "\">Trajectories (x over t); blue AV, orange HV, red lane changer</text>\n";
  svg << "<rect x=\"" << kMargin << "\" y=\"" << top1 << "\" width=\"" << plot_w
      << "\" height=\"" << kPanel << "\" fill=\"none\" stroke=\"#999\"/>\n";
  const std::size_t n = trace.ticks.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    const VehicleState& head = trace.ticks.front()[i];
    if (!CountsAsTraffic(head)) continue;
    svg << "<polyline fill=\"none\" stroke-width=\""
        << (head.kind == VehicleKind::kLaneChanger ? 2.0 : 1.0) << "\" stroke=\""
        << Color(head.kind) << "\" points=\"";
    for (std::size_t k = 0; k < trace.ticks.size(); ++k) {
      svg << px(trace.time(static_cast<int>(k))) << ","
          << py(trace.ticks[k][i].x, top1) << " ";
    }
    svg << "\"/>\n";
  }
  const double rx0 = std::clamp(px(region.t_min), kMargin, kMargin + plot_w);
  const double rx1 = std::clamp(px(region.t_max), kMargin, kMargin + plot_w);
  const double ry0 = std::clamp(py(region.x_max, top1), top1, top1 + kPanel);
  const double ry1 = std::clamp(py(region.x_min, top1), top1, top1 + kPanel);
  svg << "<rect x=\"" << rx0 << "\" y=\"" << ry0 << "\" width=\"" << rx1 - rx0
      << "\" height=\"" << ry1 - ry0
      << "\" fill=\"none\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";

  // Heatmap panel.
  const double top2 = 2 * kMargin + kPanel;
  svg << "<text x=\"" << kMargin << "\" y=\"" << top2 - 10
      << "\">Mean speed per cell (red slow, green fast; max " << v_hi
      << " m/s)</text>\n";
  svg << "<rect x=\"" << kMargin << "\" y=\"" << top2 << "\" width=\"" << plot_w
      << "\" height=\"" << kPanel << "\" fill=\"#f4f4f4\" stroke=\"#999\"/>\n";
  for (int it = 0; it < grid.nt; ++it) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const auto& m = grid.at(it, ix);
      if (!m) continue;
      const double a = px(grid.t_min + it * grid.dt);
      const double b = px(grid.t_min + (it + 1) * grid.dt);
      const double c = py(grid.x_min + (ix + 1) * grid.dx, top2);
      const double d = py(grid.x_min + ix * grid.dx, top2);
      svg << "<rect x=\"" << a << "\" y=\"" << c << "\" width=\"" << b - a
          << "\" height=\"" << d - c << "\" fill=\"" << SpeedColor(*m, v_hi)
          << "\"/>\n";
    }
  }
  svg << "<text x=\"" << kMargin << "\" y=\"" << top2 + kPanel + 20 << "\">t "
      << t_lo << " to " << t_hi << " s; x " << x_lo << " to " << x_hi
      << " m</text>\n</svg>\n";
  return svg.str();
}

}  // namespace lanepareto
