#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sc2 {

// Dense row-major grid of doubles. Indexed (ix, iy) with ix the column
// (x axis) and iy the row (y axis).
class Grid {
 public:
  Grid() = default;
  Grid(int nx, int ny, double fill = 0.0)
      : nx_(nx), ny_(ny), data_(static_cast<size_t>(nx) * ny, fill) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  size_t size() const { return data_.size(); }

  double& at(int ix, int iy) { return data_[static_cast<size_t>(iy) * nx_ + ix]; }
  double at(int ix, int iy) const { return data_[static_cast<size_t>(iy) * nx_ + ix]; }
  bool in_bounds(int ix, int iy) const { return ix >= 0 && ix < nx_ && iy >= 0 && iy < ny_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v) { data_.assign(data_.size(), v); }

  double sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
  }

  // Translate contents by (dx, dy) cells: new(ix,iy) = old(ix+dx, iy+dy).
  // Cells that had no source are set to `fill`.
  void shift_cells(int dx, int dy, double fill_value) {
    if (dx == 0 && dy == 0) return;
    Grid out(nx_, ny_, fill_value);
    for (int iy = 0; iy < ny_; ++iy) {
      const int sy = iy + dy;
      if (sy < 0 || sy >= ny_) continue;
      for (int ix = 0; ix < nx_; ++ix) {
        const int sx = ix + dx;
        if (sx < 0 || sx >= nx_) continue;
        out.at(ix, iy) = at(sx, sy);
      }
    }
    data_.swap(out.data_);
  }

  bool operator==(const Grid& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && data_ == o.data_;
  }

 private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> data_;
};

// 8-bit binary PGM, value = round(255 * v / vmax), clamped to [0, 255].
// Row 0 is written last so the image y axis points up.
inline void write_pgm(const Grid& g, double vmax, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "P5\n" << g.nx() << " " << g.ny() << "\n255\n";
  std::vector<unsigned char> row(static_cast<size_t>(g.nx()));
  for (int iy = g.ny() - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < g.nx(); ++ix) {
      double v = vmax > 0 ? g.at(ix, iy) / vmax : 0.0;
      v = v < 0 ? 0 : (v > 1 ? 1 : v);
      row[static_cast<size_t>(ix)] = static_cast<unsigned char>(std::lround(255.0 * v));
    }
    f.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
}

// CSV export: header line carries the frame, then one row per iy (row-major).
inline void write_grid_csv(const Grid& g, double origin_x, double origin_y, double cell,
                           const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f.precision(17);
  f << "# origin_x=" << origin_x << " origin_y=" << origin_y << " cell=" << cell
    << " side=" << g.nx() * cell << " nx=" << g.nx() << " ny=" << g.ny() << "\n";
  for (int iy = 0; iy < g.ny(); ++iy) {
    for (int ix = 0; ix < g.nx(); ++ix) {
      if (ix) f << ",";
      f << g.at(ix, iy);
    }
    f << "\n";
  }
}

struct GridCsv {
  Grid grid;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell = 1.0;
};

inline GridCsv read_grid_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  std::string header;
  std::getline(f, header);
  GridCsv out;
  int nx = 0, ny = 0;
  auto field = [&](const std::string& key) -> double {
    const auto pos = header.find(key + "=");
    if (pos == std::string::npos) throw std::runtime_error("grid csv missing " + key + ": " + path);
    return std::stod(header.substr(pos + key.size() + 1));
  };
  out.origin_x = field("origin_x");
  out.origin_y = field("origin_y");
  out.cell = field("cell");
  nx = static_cast<int>(field("nx"));
  ny = static_cast<int>(field("ny"));
  out.grid = Grid(nx, ny);
  for (int iy = 0; iy < ny; ++iy) {
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("grid csv truncated: " + path);
    size_t pos = 0;
    for (int ix = 0; ix < nx; ++ix) {
      size_t next = line.find(',', pos);
      out.grid.at(ix, iy) = std::stod(line.substr(pos, next - pos));
      pos = next == std::string::npos ? line.size() : next + 1;
    }
  }
  return out;
}

}  // namespace sc2
