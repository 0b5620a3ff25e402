#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "sc2/config.hpp"
#include "sc2/drone.hpp"
#include "sc2/grid.hpp"
#include "sc2/info_map.hpp"
#include "sc2/rover_path.hpp"

namespace sc2 {

struct MetricsReport {
  int steps = 0;
  int fleet = 0;
  double effective_coverage = 0.0;  // time-averaged accumulated effective coverage
  double gamma_cum = 0.0;
  double gamma_avg = 0.0;
  std::vector<double> gamma_cum_series;  // non-decreasing, against the final feasible area
  std::vector<double> gamma_avg_series;
  long collision_events = 0;
  long connectivity_events = 0;
  long battery_deaths = 0;
  long infeasible_events = 0;
  long ring_violations = 0;
  double wall_clock_s = 0.0;  // reported via the manifest, never in metrics JSON

  nlohmann::json to_json() const {
    return nlohmann::json{{"steps", steps},
                          {"n", fleet},
                          {"effective_coverage", effective_coverage},
                          {"gamma_cum", gamma_cum},
                          {"gamma_avg", gamma_avg},
                          {"collision_events", collision_events},
                          {"connectivity_events", connectivity_events},
                          {"battery_deaths", battery_deaths},
                          {"infeasible_events", infeasible_events},
                          {"ring_violations", ring_violations},
                          {"gamma_cum_series", gamma_cum_series},
                          {"gamma_avg_series", gamma_avg_series}};
  }
};

// World-frame coverage bookkeeping for the cumulative ratio. The world grid
// shares the map's cell lattice, so rover-window cells transfer 1:1 and a
// cell's historical maximum freezes when it leaves the window. The feasible
// area is the union of the per-step communication discs; the per-step series
// uses the final area as denominator, which makes it non-decreasing.
class WorldCoverage {
 public:
  WorldCoverage() = default;

  WorldCoverage(const RoverPath& path, const MapFrame& initial_frame,
                const MissionConfig& cfg)
      : cell_(initial_frame.cell), m_a_(cfg.m_a) {
    double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
    for (const Vec2& w : path.waypoints()) {
      lo_x = std::min(lo_x, w.x);
      lo_y = std::min(lo_y, w.y);
      hi_x = std::max(hi_x, w.x);
      hi_y = std::max(hi_y, w.y);
    }
    const double pad = cfg.r_c + cfg.r_s + 2.0 * cell_;
    // Anchor on the map lattice so window cells land exactly on world cells.
    x0_ = initial_frame.x0() -
          cell_ * std::ceil((initial_frame.x0() - (lo_x - pad)) / cell_);
    y0_ = initial_frame.y0() -
          cell_ * std::ceil((initial_frame.y0() - (lo_y - pad)) / cell_);
    nx_ = static_cast<int>(std::ceil((hi_x + pad - x0_) / cell_));
    ny_ = static_cast<int>(std::ceil((hi_y + pad - y0_) / cell_));
    max_ = Grid(nx_, ny_, 0.0);
    mask_ = std::vector<uint8_t>(static_cast<size_t>(nx_) * ny_, 0);
  }

  // Fold in one step: extend the feasible mask by the current communication
  // disc and merge the window's perception values into the running maxima.
  void update(const InfoMap& m, Vec2 rover, const MissionConfig& cfg) {
    const double r = cfg.r_c;
    const int jx_lo = std::max(0, static_cast<int>(std::floor((rover.x - r - x0_) / cell_)));
    const int jx_hi = std::min(nx_ - 1, static_cast<int>(std::floor((rover.x + r - x0_) / cell_)));
    const int jy_lo = std::max(0, static_cast<int>(std::floor((rover.y - r - y0_) / cell_)));
    const int jy_hi = std::min(ny_ - 1, static_cast<int>(std::floor((rover.y + r - y0_) / cell_)));
    for (int jy = jy_lo; jy <= jy_hi; ++jy)
      for (int jx = jx_lo; jx <= jx_hi; ++jx) {
        const Vec2 c{x0_ + (jx + 0.5) * cell_, y0_ + (jy + 0.5) * cell_};
        if (distance(c, rover) > r) continue;
        uint8_t& mk = mask_[static_cast<size_t>(jy) * nx_ + jx];
        if (!mk) {
          mk = 1;
          ++mask_count_;
          numer_ += max_.at(jx, jy);
        }
      }

    // window cell (ix, iy) -> world cell; the lattices are aligned.
    const int ox = static_cast<int>(std::llround((m.frame.x0() - x0_) / cell_));
    const int oy = static_cast<int>(std::llround((m.frame.y0() - y0_) / cell_));
    for (int iy = 0; iy < m.frame.ny; ++iy) {
      const int jy = iy + oy;
      if (jy < 0 || jy >= ny_) continue;
      for (int ix = 0; ix < m.frame.nx; ++ix) {
        const int jx = ix + ox;
        if (jx < 0 || jx >= nx_) continue;
        const double v = m.perception.at(ix, iy);
        double& mx = max_.at(jx, jy);
        if (v > mx) {
          if (mask_[static_cast<size_t>(jy) * nx_ + jx]) numer_ += v - mx;
          mx = v;
        }
      }
    }
    series_raw_.push_back(numer_);
  }

  double gamma_cum() const {
    const double denom = m_a_ * static_cast<double>(mask_count_);
    return denom > 0 ? numer_ / denom : 0.0;
  }

  std::vector<double> gamma_cum_series() const {
    std::vector<double> s = series_raw_;
    const double denom = m_a_ * static_cast<double>(mask_count_);
    for (double& v : s) v = denom > 0 ? v / denom : 0.0;
    return s;
  }

  // Mean of the per-cell running maxima inside a disc (adaptive-exploration
  // comparisons).
  double mean_max_in_disc(Vec2 center, double radius) const {
    double sum = 0.0;
    long count = 0;
    for (int jy = 0; jy < ny_; ++jy)
      for (int jx = 0; jx < nx_; ++jx) {
        const Vec2 c{x0_ + (jx + 0.5) * cell_, y0_ + (jy + 0.5) * cell_};
        if (distance(c, center) > radius) continue;
        sum += max_.at(jx, jy);
        ++count;
      }
    return count ? sum / static_cast<double>(count) : 0.0;
  }

  long feasible_cells() const { return mask_count_; }
  const Grid& running_max() const { return max_; }

 private:
  double cell_ = 1.0;
  double m_a_ = 1.0;
  double x0_ = 0.0, y0_ = 0.0;
  int nx_ = 0, ny_ = 0;
  Grid max_;
  std::vector<uint8_t> mask_;
  long mask_count_ = 0;
  double numer_ = 0.0;
  std::vector<double> series_raw_;
};

// Instantaneous coverage ratio against the current communication disc.
inline double instant_coverage_ratio(const InfoMap& m, Vec2 rover, const MissionConfig& cfg) {
  double sum = 0.0;
  long count = 0;
  for (int iy = 0; iy < m.frame.ny; ++iy)
    for (int ix = 0; ix < m.frame.nx; ++ix) {
      if (distance(m.frame.cell_center(ix, iy), rover) > cfg.r_c) continue;
      sum += m.perception.at(ix, iy);
      ++count;
    }
  return count ? sum / (cfg.m_a * static_cast<double>(count)) : 0.0;
}

// Per-drone decayed sensing fields in the rover window; their running total
// is the mission objective. Fields shift with the map so they stay aligned.
class EffectiveCoverage {
 public:
  EffectiveCoverage() = default;

  EffectiveCoverage(int fleet, const MapFrame& frame)
      : fields_(static_cast<size_t>(fleet), Grid(frame.nx, frame.ny, 0.0)) {}

  void step(const MapFrame& frame, const std::vector<DroneState>& fleet,
            const MissionConfig& cfg) {
    const double decay = cfg.m_a / cfg.eta;
    const double rr = cfg.r_s / cfg.cell;
    for (size_t i = 0; i < fields_.size(); ++i) {
      Grid& f = fields_[i];
      for (int iy = 0; iy < frame.ny; ++iy)
        for (int ix = 0; ix < frame.nx; ++ix) {
          double v = f.at(ix, iy) - decay;
          f.at(ix, iy) = v > 0.0 ? v : 0.0;
        }
      const DroneState& d = fleet[i];
      if (d.mode != Mode::Charge) {
        const double fx = frame.fx(d.p.x);
        const double fy = frame.fy(d.p.y);
        const int ix_lo = std::max(0, static_cast<int>(std::ceil(fx - rr)));
        const int ix_hi = std::min(frame.nx - 1, static_cast<int>(std::floor(fx + rr)));
        const int iy_lo = std::max(0, static_cast<int>(std::ceil(fy - rr)));
        const int iy_hi = std::min(frame.ny - 1, static_cast<int>(std::floor(fy + rr)));
        for (int iy = iy_lo; iy <= iy_hi; ++iy)
          for (int ix = ix_lo; ix <= ix_hi; ++ix) {
            const double e = sensor_value(distance(d.p, frame.cell_center(ix, iy)), d.mode, cfg);
            if (e > f.at(ix, iy)) f.at(ix, iy) = e;
          }
      }
      accum_ += f.sum();
    }
  }

  void shift(int sx, int sy) {
    for (Grid& f : fields_) f.shift_cells(sx, sy, 0.0);
  }

  // E = (1/T) * sum over drones, steps and cells.
  double finalize(int steps) const { return steps > 0 ? accum_ / steps : 0.0; }

 private:
  std::vector<Grid> fields_;
  double accum_ = 0.0;
};

// Steady-state map mass of a single stationary, non-charging drone: with
// sensing refreshing every cell each step, the plateau is just the sensing
// kernel sampled on the grid.
inline double baseline_map(const MissionConfig& cfg) {
  const int n = cfg.map_cells();
  MapFrame frame;
  frame.cell = cfg.cell;
  frame.nx = frame.ny = n;
  frame.center = {0.0, 0.0};
  double sum = 0.0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      sum += sensor_value(frame.cell_center(ix, iy).norm(), Mode::Explore, cfg);
  return sum;
}

}  // namespace sc2
