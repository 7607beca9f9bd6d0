#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lanepareto/scenario.h"
#include "lanepareto/sim_engine.h"

namespace lanepareto {

struct EdieRegion {
  double x_min = 0.0, x_max = 0.0;  // m
  double t_min = 0.0, t_max = 0.0;  // s

  double area() const { return (x_max - x_min) * (t_max - t_min); }
};

void Validate(const EdieRegion& r);

// Region anchored at the lane changer's position at t0.
EdieRegion RegionFor(const SimulationTrace& trace, const EdieRegionSpec& spec);

struct EdieMetrics {
  double flow = 0.0;     // q, veh/h
  double speed = 0.0;    // space-mean speed, m/s
  double density = 0.0;  // k, veh/km
  double distance = 0.0;  // d(A), m
  double time = 0.0;      // t(A), s
  double area = 0.0;      // |A|, m s
};

// Generalised definitions from accumulated totals.
EdieMetrics EdieFromTotals(double distance, double time, double area);

struct RegionRow {
  int vehicle_id = 0;
  std::string kind;
  double distance = 0.0;  // m
  double time = 0.0;      // s
};

// Distance and time spent inside the rectangle for every vehicle that
// enters it. Motion between ticks is taken as linear and clipped exactly.
// The stationary incident vehicle is not part of the traffic stream and is
// skipped. Throws Error when the region's time span is outside the trace.
std::vector<RegionRow> PerVehicleRegionTable(const SimulationTrace& trace,
                                             const EdieRegion& region);

EdieMetrics ComputeEdieMetrics(const SimulationTrace& trace,
                               const EdieRegion& region);

struct HeatmapWindow {
  double x_min = 0.0, x_max = 0.0;
  double t_min = 0.0, t_max = 0.0;
};

// Mean instantaneous speed per (t, x) cell. Cell (it, ix) spans
// [t_min + it*dt, t_min + (it+1)*dt) x [x_min + ix*dx, x_min + (ix+1)*dx).
struct HeatmapGrid {
  double x_min = 0.0, t_min = 0.0;
  double dx = 1.0, dt = 1.0;
  int nx = 0, nt = 0;
  std::vector<std::optional<double>> mean;  // row-major by time
  std::vector<int> count;

  const std::optional<double>& at(int it, int ix) const {
    return mean[static_cast<std::size_t>(it) * nx + ix];
  }
};

// Without a window the grid covers every traffic sample in the trace.
// Throws ConfigError for non-positive cell sizes.
HeatmapGrid BuildHeatmap(const SimulationTrace& trace, double dx, double dt,
                         const std::optional<HeatmapWindow>& window = {});

std::string EdieToJson(const EdieMetrics& m, const EdieRegion& r);
// Columns: vehicle_id,kind,distance_m,time_s, then a totals row.
std::string RegionTableToCsv(const std::vector<RegionRow>& rows);
// Columns: t,x,speed (cell centres); absent cells are omitted.
std::string HeatmapToCsv(const HeatmapGrid& grid);

// Two-panel SVG: vehicle trajectories in (t, x) with the region outline, and
// the speed heatmap.
std::string RenderSvg(const SimulationTrace& trace, const HeatmapGrid& grid,
                      const EdieRegion& region);

}  // namespace lanepareto
