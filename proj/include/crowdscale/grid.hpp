#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "crowdscale/vec2.hpp"

namespace crowdscale {

/// Uniform periodic cell grid on [0, lx) x [0, ly). Cell (i, j) has index
/// j * nx + i and center ((i + 1/2) dx, (j + 1/2) dy).
struct Grid2D {
  int nx = 1;
  int ny = 1;
  double lx = 1.0;
  double ly = 1.0;

  Grid2D() = default;
  Grid2D(int nx_, int ny_, double lx_, double ly_) : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
    if (nx < 1 || ny < 1 || !(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("Grid2D: bad dimensions");
  }

  int cells() const { return nx * ny; }
  double dx() const { return lx / nx; }
  double dy() const { return ly / ny; }
  double cell_area() const { return dx() * dy(); }
  double diameter() const { return std::hypot(lx, ly); }
  int index(int i, int j) const { return wrap_j(j) * nx + wrap_i(i); }
  int wrap_i(int i) const { return ((i % nx) + nx) % nx; }
  int wrap_j(int j) const { return ((j % ny) + ny) % ny; }
  Vec2 center(int i, int j) const { return {(i + 0.5) * dx(), (j + 0.5) * dy()}; }
  Vec2 center(int c) const { return center(c % nx, c / nx); }
};

/// Offset from a cell to another cell of a periodic grid.
struct CellOffset {
  int di = 0;
  int dj = 0;
  Vec2 vec;
  double length = 0.0;
};

/// Every other cell exactly once, by minimum-image offset, sorted by length.
inline std::vector<CellOffset> periodic_offsets(const Grid2D& g) {
  std::vector<CellOffset> out;
  for (int dj = -((g.ny - 1) / 2); dj <= g.ny / 2; ++dj) {
    for (int di = -((g.nx - 1) / 2); di <= g.nx / 2; ++di) {
      if (di == 0 && dj == 0) continue;
      const Vec2 v{di * g.dx(), dj * g.dy()};
      out.push_back({di, dj, v, norm(v)});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const CellOffset& a, const CellOffset& b) { return a.length < b.length; });
  return out;
}

/// Periodic box used by the particle model for minimum-image offsets.
struct PeriodicBox {
  double lx = 0.0;
  double ly = 0.0;

  Vec2 wrap(Vec2 p) const {
    p.x -= lx * std::floor(p.x / lx);
    p.y -= ly * std::floor(p.y / ly);
    if (p.x >= lx) p.x -= lx;
    if (p.y >= ly) p.y -= ly;
    return p;
  }
  Vec2 offset(Vec2 from, Vec2 to) const {
    Vec2 d = to - from;
    d.x -= lx * std::round(d.x / lx);
    d.y -= ly * std::round(d.y / ly);
    return d;
  }
  double diameter() const { return std::hypot(lx, ly); }
};

}  // namespace crowdscale
