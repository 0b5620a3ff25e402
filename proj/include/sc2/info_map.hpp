#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "sc2/config.hpp"
#include "sc2/drone.hpp"
#include "sc2/grid.hpp"
#include "sc2/vec2.hpp"

namespace sc2 {

// Hill-shaped sensing kernel: peak m_a over the drone, zero at and beyond the
// sensing range, with both the value and the slope vanishing at r_s. Parked
// (charging) drones sense nothing.
inline double sensor_value(double c, Mode mode, const MissionConfig& cfg) {
  if (mode == Mode::Charge || c > cfg.r_s) return 0.0;
  const double d = c * c - cfg.r_s * cfg.r_s;
  const double r2 = cfg.r_s * cfg.r_s;
  return cfg.m_a / (r2 * r2) * d * d;
}

// Square rover-centered frame shared by all map channels. The grid center
// stays on a cell-size lattice; `target_center` tracks the rover exactly and
// the sub-cell residual is carried so repeated shifts never drift.
struct MapFrame {
  Vec2 center;         // grid anchor (lattice-aligned)
  Vec2 target_center;  // exact tracked point
  double cell = 1.0;
  int nx = 0;
  int ny = 0;

  Vec2 cell_center(int ix, int iy) const {
    return {center.x + (ix - (nx - 1) * 0.5) * cell,
            center.y + (iy - (ny - 1) * 0.5) * cell};
  }
  // Continuous cell coordinates of a world point (cell centers at integers).
  double fx(double wx) const { return (wx - center.x) / cell + (nx - 1) * 0.5; }
  double fy(double wy) const { return (wy - center.y) / cell + (ny - 1) * 0.5; }
  // World x of the left edge of column 0 / bottom edge of row 0.
  double x0() const { return center.x - nx * 0.5 * cell; }
  double y0() const { return center.y - ny * 0.5 * cell; }
};

// Exploration-value terrain prior in [0, 1]. Sampled in the world frame so it
// survives map shifts. Either analytic (disc) or a loaded grid.
class ValueField {
 public:
  ValueField() = default;

  static ValueField disc(Vec2 center, double radius, double inside, double outside) {
    if (inside < 0 || inside > 1 || outside < 0 || outside > 1)
      throw std::invalid_argument("value field entries must lie in [0,1]");
    ValueField v;
    v.kind_ = Kind::Disc;
    v.disc_center_ = center;
    v.disc_radius_ = radius;
    v.inside_ = inside;
    v.outside_ = outside;
    return v;
  }

  static ValueField from_grid(GridCsv g, double outside = 1.0) {
    for (int iy = 0; iy < g.grid.ny(); ++iy)
      for (int ix = 0; ix < g.grid.nx(); ++ix) {
        const double v = g.grid.at(ix, iy);
        if (!(v >= 0.0 && v <= 1.0))
          throw std::invalid_argument("value field entries must lie in [0,1]");
      }
    if (outside < 0 || outside > 1)
      throw std::invalid_argument("value field entries must lie in [0,1]");
    ValueField v;
    v.kind_ = Kind::GridKind;
    v.grid_ = std::make_shared<GridCsv>(std::move(g));
    v.outside_ = outside;
    return v;
  }

  bool empty() const { return kind_ == Kind::None; }

  double sample(Vec2 w) const {
    switch (kind_) {
      case Kind::None:
        return 1.0;
      case Kind::Disc:
        return distance(w, disc_center_) <= disc_radius_ ? inside_ : outside_;
      case Kind::GridKind: {
        const int ix = static_cast<int>(std::floor((w.x - grid_->origin_x) / grid_->cell));
        const int iy = static_cast<int>(std::floor((w.y - grid_->origin_y) / grid_->cell));
        if (!grid_->grid.in_bounds(ix, iy)) return outside_;
        return grid_->grid.at(ix, iy);
      }
    }
    return 1.0;
  }

 private:
  enum class Kind { None, Disc, GridKind };
  Kind kind_ = Kind::None;
  Vec2 disc_center_;
  double disc_radius_ = 0.0;
  double inside_ = 1.0;
  double outside_ = 1.0;
  std::shared_ptr<const GridCsv> grid_;
};

// The stacked state representation: a perception channel recording decayed
// sensing history and a binary obstacle channel. An optional value field
// floors the perception channel so low-value terrain reads as already
// covered.
struct InfoMap {
  MapFrame frame;
  Grid perception;  // M(q) in [0, m_a]
  Grid obstacle;    // O(q) in {0, 1}
  Grid floor;       // per-cell lower bound on M(q); all zero when not fused
  ValueField value;
  bool fused = false;
  double m_a = 1.0;

  double perception_sum() const { return perception.sum(); }
};

inline InfoMap make_info_map(const MissionConfig& cfg, Vec2 rover_world) {
  InfoMap m;
  const int n = cfg.map_cells();
  m.frame.cell = cfg.cell;
  m.frame.nx = m.frame.ny = n;
  m.frame.center = rover_world;
  m.frame.target_center = rover_world;
  m.perception = Grid(n, n, 0.0);
  m.obstacle = Grid(n, n, 0.0);
  m.floor = Grid(n, n, 0.0);
  m.m_a = cfg.m_a;
  return m;
}

namespace detail {

inline void refresh_floor(InfoMap& m) {
  if (!m.fused) return;
  for (int iy = 0; iy < m.frame.ny; ++iy)
    for (int ix = 0; ix < m.frame.nx; ++ix) {
      const double f = m.m_a * (1.0 - m.value.sample(m.frame.cell_center(ix, iy)));
      m.floor.at(ix, iy) = f;
      if (m.perception.at(ix, iy) < f) m.perception.at(ix, iy) = f;
    }
}

}  // namespace detail

// Install a terrain-value prior: the perception channel is floored at
// m_a * (1 - V(q)) from now on, including after decay and map shifts.
inline void fuse_value_map(InfoMap& m, ValueField v) {
  m.value = std::move(v);
  m.fused = true;
  detail::refresh_floor(m);
}

struct SensingResult {
  double sum_after_decay = 0.0;       // map mass after decay, before sensing
  double sum_after = 0.0;             // map mass after the fleet update
  std::vector<double> marginal;       // per drone: mass it alone adds over the decayed map
};

// One perception update step: a single decay by m_a/eta (floored at the value
// floor), then each non-charging drone's sensing footprint is max-merged in.
// Marginals are measured per drone against the common decayed map, so they do
// not depend on fleet ordering.
inline SensingResult apply_sensing(InfoMap& m, const std::vector<DroneState>& fleet,
                                   const MissionConfig& cfg) {
  SensingResult res;
  res.marginal.assign(fleet.size(), 0.0);

  const double decay = cfg.m_a / cfg.eta;
  for (int iy = 0; iy < m.frame.ny; ++iy)
    for (int ix = 0; ix < m.frame.nx; ++ix) {
      double v = m.perception.at(ix, iy) - decay;
      const double f = m.fused ? m.floor.at(ix, iy) : 0.0;
      if (v < f) v = f;
      m.perception.at(ix, iy) = v;
      res.sum_after_decay += v;
    }

  const Grid base = m.perception;
  const double rr = cfg.r_s / cfg.cell;
  for (size_t i = 0; i < fleet.size(); ++i) {
    const DroneState& d = fleet[i];
    if (d.mode == Mode::Charge) continue;
    const double fx = m.frame.fx(d.p.x);
    const double fy = m.frame.fy(d.p.y);
    const int ix_lo = std::max(0, static_cast<int>(std::ceil(fx - rr)));
    const int ix_hi = std::min(m.frame.nx - 1, static_cast<int>(std::floor(fx + rr)));
    const int iy_lo = std::max(0, static_cast<int>(std::ceil(fy - rr)));
    const int iy_hi = std::min(m.frame.ny - 1, static_cast<int>(std::floor(fy + rr)));
    double gain = 0.0;
    for (int iy = iy_lo; iy <= iy_hi; ++iy)
      for (int ix = ix_lo; ix <= ix_hi; ++ix) {
        const double e = sensor_value(distance(d.p, m.frame.cell_center(ix, iy)), d.mode, cfg);
        if (e <= 0.0) continue;
        const double b = base.at(ix, iy);
        if (e > b) gain += e - b;
        if (e > m.perception.at(ix, iy)) m.perception.at(ix, iy) = e;
      }
    res.marginal[i] = gain;
  }
  res.sum_after = m.perception.sum();
  return res;
}

// Track the rover: translate map contents by the whole-cell part of the
// accumulated displacement and keep the sub-cell residual for later, so the
// content is never resampled. Newly exposed cells start at zero (or at the
// value floor when fused). Returns the applied whole-cell shift so aligned
// layers can follow.
struct CellShift {
  int sx = 0;
  int sy = 0;
};

inline CellShift shift_map(InfoMap& m, Vec2 delta) {
  m.frame.target_center += delta;
  const auto cells = [&](double d) {
    return static_cast<int>(std::llround(d / m.frame.cell));
  };
  const int sx = cells(m.frame.target_center.x - m.frame.center.x);
  const int sy = cells(m.frame.target_center.y - m.frame.center.y);
  if (sx == 0 && sy == 0) return {};
  m.frame.center.x += sx * m.frame.cell;
  m.frame.center.y += sy * m.frame.cell;
  m.perception.shift_cells(sx, sy, 0.0);
  m.obstacle.shift_cells(sx, sy, 0.0);
  m.floor.shift_cells(sx, sy, 0.0);
  detail::refresh_floor(m);
  return {sx, sy};
}

// Obstacle channel: a cell is infeasible when any drone sits within the
// safety radius of it or when it lies outside the rover's communication
// range. Two passes: the communication annulus over the whole grid (squared
// distances), then one small stamp per drone.
inline void build_obstacle(InfoMap& m, const std::vector<DroneState>& fleet,
                           Vec2 rover_world, const MissionConfig& cfg) {
  const double rc2 = cfg.r_c * cfg.r_c;
  for (int iy = 0; iy < m.frame.ny; ++iy) {
    const double dy = m.frame.cell_center(0, iy).y - rover_world.y;
    const double dy2 = dy * dy;
    for (int ix = 0; ix < m.frame.nx; ++ix) {
      const double dx = m.frame.cell_center(ix, iy).x - rover_world.x;
      m.obstacle.at(ix, iy) = dx * dx + dy2 > rc2 ? 1.0 : 0.0;
    }
  }
  const double ro2 = cfg.r_o * cfg.r_o;
  const double rr = cfg.r_o / cfg.cell;
  for (const DroneState& d : fleet) {
    const double fx = m.frame.fx(d.p.x);
    const double fy = m.frame.fy(d.p.y);
    const int ix_lo = std::max(0, static_cast<int>(std::ceil(fx - rr)));
    const int ix_hi = std::min(m.frame.nx - 1, static_cast<int>(std::floor(fx + rr)));
    const int iy_lo = std::max(0, static_cast<int>(std::ceil(fy - rr)));
    const int iy_hi = std::min(m.frame.ny - 1, static_cast<int>(std::floor(fy + rr)));
    for (int iy = iy_lo; iy <= iy_hi; ++iy)
      for (int ix = ix_lo; ix <= ix_hi; ++ix) {
        const Vec2 q = m.frame.cell_center(ix, iy);
        if ((d.p - q).norm2() < ro2) m.obstacle.at(ix, iy) = 1.0;
      }
  }
}

// Drone-centered clip of the information map, area-averaged to a fixed size.
// Values are normalized to [0, 1]; anything outside the global map reads as
// uncovered obstacle (perception 0, obstacle 1).
struct LocalObservation {
  int d = 0;
  std::vector<double> perception;
  std::vector<double> obstacle;

  size_t input_size() const { return perception.size() + obstacle.size(); }
  void to_input(std::vector<double>& out) const {
    out.resize(input_size());
    std::copy(perception.begin(), perception.end(), out.begin());
    std::copy(obstacle.begin(), obstacle.end(),
              out.begin() + static_cast<long>(perception.size()));
  }
};

namespace detail {

struct AxisWeights {
  // For each output bin: contributing source indices, overlap widths, and the
  // total covered width (the rest of the bin is padding).
  std::vector<int> first;
  std::vector<int> count;
  std::vector<double> weight;  // flattened
  std::vector<double> covered;
};

inline AxisWeights axis_overlap(double win_lo, double bin_w, int bins, double src0,
                                double cell, int ncells) {
  AxisWeights a;
  a.first.resize(static_cast<size_t>(bins));
  a.count.assign(static_cast<size_t>(bins), 0);
  a.covered.assign(static_cast<size_t>(bins), 0.0);
  for (int o = 0; o < bins; ++o) {
    const double lo = win_lo + o * bin_w;
    const double hi = lo + bin_w;
    int i_lo = static_cast<int>(std::floor((lo - src0) / cell));
    int i_hi = static_cast<int>(std::floor((hi - src0) / cell));
    i_lo = std::max(i_lo, 0);
    i_hi = std::min(i_hi, ncells - 1);
    a.first[static_cast<size_t>(o)] = i_lo;
    for (int i = i_lo; i <= i_hi; ++i) {
      const double s_lo = src0 + i * cell;
      const double ov = std::min(hi, s_lo + cell) - std::max(lo, s_lo);
      if (ov <= 0.0) continue;
      a.weight.push_back(ov);
      a.count[static_cast<size_t>(o)]++;
      a.covered[static_cast<size_t>(o)] += ov;
    }
  }
  return a;
}

}  // namespace detail

inline LocalObservation clip_local(const InfoMap& m, Vec2 p, int d_out,
                                   const MissionConfig& cfg) {
  LocalObservation obs;
  obs.d = d_out;
  obs.perception.assign(static_cast<size_t>(d_out) * d_out, 0.0);
  obs.obstacle.assign(static_cast<size_t>(d_out) * d_out, 1.0);

  const double win = 2.0 * cfg.r_s;
  const double bin_w = win / d_out;
  const auto ax = detail::axis_overlap(p.x - cfg.r_s, bin_w, d_out, m.frame.x0(),
                                       m.frame.cell, m.frame.nx);
  const auto ay = detail::axis_overlap(p.y - cfg.r_s, bin_w, d_out, m.frame.y0(),
                                       m.frame.cell, m.frame.ny);

  const double area = bin_w * bin_w;
  size_t wy_off = 0;
  for (int oy = 0; oy < d_out; ++oy) {
    size_t wx_off = 0;
    for (int ox = 0; ox < d_out; ++ox) {
      double perc = 0.0;
      double obst = 0.0;
      for (int j = 0; j < ay.count[static_cast<size_t>(oy)]; ++j) {
        const int iy = ay.first[static_cast<size_t>(oy)] + j;
        const double wyj = ay.weight[wy_off + static_cast<size_t>(j)];
        for (int i = 0; i < ax.count[static_cast<size_t>(ox)]; ++i) {
          const int ix = ax.first[static_cast<size_t>(ox)] + i;
          const double w = wyj * ax.weight[wx_off + static_cast<size_t>(i)];
          perc += w * m.perception.at(ix, iy);
          obst += w * m.obstacle.at(ix, iy);
        }
      }
      const double covered = ax.covered[static_cast<size_t>(ox)] * ay.covered[static_cast<size_t>(oy)];
      const double pad = area - covered;
      const auto unit = [](double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); };
      obs.perception[static_cast<size_t>(oy) * d_out + ox] = unit((perc / m.m_a) / area);
      obs.obstacle[static_cast<size_t>(oy) * d_out + ox] = unit((obst + pad) / area);
      wx_off += static_cast<size_t>(ax.count[static_cast<size_t>(ox)]);
    }
    wy_off += static_cast<size_t>(ay.count[static_cast<size_t>(oy)]);
  }
  return obs;
}

}  // namespace sc2
