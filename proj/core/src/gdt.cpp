#include "latfuse/gdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace latfuse {
namespace {

// Scratch space for one 1-D pass, reused across the lines of a 3-D grid.
struct Workspace {
  std::vector<std::size_t> hull;  // parabola apexes on the envelope
  std::vector<double> bound;      // hull[k] rules over [bound[k], bound[k+1]]

  void reserve(std::size_t n) {
    hull.resize(n);
    bound.resize(n + 1);
  }
};

void envelope_line(const double* in, std::size_t n, double w, double* out,
                   std::size_t* arg, Workspace& ws) {
  if (n == 0) return;
  if (w == 0.0) {
    std::size_t best = 0;
    for (std::size_t p = 1; p < n; ++p)
      if (in[p] > in[best]) best = p;
    for (std::size_t q = 0; q < n; ++q) {
      out[q] = in[best];
      arg[q] = best;
    }
    return;
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  ws.reserve(n);
  auto& v = ws.hull;
  auto& z = ws.bound;
  // Minimization over g = -phi; key(p) = g(p) + w p^2.
  auto key = [&](std::size_t p) {
    const double pd = static_cast<double>(p);
    return -in[p] + w * pd * pd;
  };

  std::size_t k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (std::size_t q = 1; q < n; ++q) {
    const double kq = key(q);
    double s = (kq - key(v[k])) / (2.0 * w * static_cast<double>(q - v[k]));
    // z[0] = -inf stops the pop at the first parabola.
    while (s <= z[k]) {
      --k;
      s = (kq - key(v[k])) / (2.0 * w * static_cast<double>(q - v[k]));
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }

  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double qd = static_cast<double>(q);
    while (z[k + 1] < qd) ++k;
    const std::size_t p = v[k];
    const double d = qd - static_cast<double>(p);
    out[q] = in[p] - w * d * d;
    arg[q] = p;
  }
}

void check_weight(double w) {
  if (!(w >= 0.0) || !std::isfinite(w))
    throw std::invalid_argument("distance weights must be finite and non-negative");
}

}  // namespace

Envelope1D envelope_1d(std::span<const double> values, double weight) {
  check_weight(weight);
  if (values.empty()) throw std::invalid_argument("envelope_1d: empty input");
  Envelope1D out;
  out.value.resize(values.size());
  out.argmax.resize(values.size());
  Workspace ws;
  envelope_line(values.data(), values.size(), weight, out.value.data(),
                out.argmax.data(), ws);
  return out;
}

Grid3D::Grid3D(std::size_t x, std::size_t y, std::size_t s, double fill)
    : X(x), Y(y), S(s), values(x * y * s, fill) {}

void Grid3D::validate() const {
  if (X == 0 || Y == 0 || S == 0) throw std::invalid_argument("grid has an empty dimension");
  if (values.size() != X * Y * S)
    throw std::invalid_argument("grid value count does not equal X*Y*S");
  check_weight(wx);
  check_weight(wy);
  check_weight(ws);
}

Transform3D transform_3d(const Grid3D& grid, std::array<Axis, 3> order) {
  Transform3D out;
  transform_3d(grid, out, order);
  return out;
}

void transform_3d(const Grid3D& grid, Transform3D& out, std::array<Axis, 3> order) {
  grid.validate();
  const std::size_t n = grid.size();

  out.transformed = grid;
  out.argmax.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.argmax[i] = i;

  // Strided lines are processed kBlock at a time, gathered row by row so
  // that every cache line of the grid is read contiguously.
  constexpr std::size_t kBlock = 16;
  const std::size_t longest = std::max({grid.X, grid.Y, grid.S});
  std::vector<double> buf_in(longest * kBlock), buf_out(longest * kBlock);
  std::vector<std::size_t> buf_arg(longest * kBlock), buf_prev(longest * kBlock);
  Workspace ws;
  auto& vals = out.transformed.values;
  auto& args = out.argmax;

  // One pass along `axis` over the cells [begin, end), which must hold whole lines.
  auto pass = [&](Axis axis, std::size_t begin, std::size_t end) {
    std::size_t len, stride;
    double w;
    switch (axis) {
      case Axis::x: len = grid.X; stride = grid.Y * grid.S; w = grid.wx; break;
      case Axis::y: len = grid.Y; stride = grid.S; w = grid.wy; break;
      default: len = grid.S; stride = 1; w = grid.ws; break;
    }
    if (len == 1) return;
    // Lines start wherever the coordinate along `axis` is zero.
    const std::size_t span = len * stride;
    for (std::size_t base = begin; base < end; base += span)
      for (std::size_t off = 0; off < stride; off += kBlock) {
        const std::size_t b = std::min(kBlock, stride - off);
        const std::size_t first = base + off;
        for (std::size_t i = 0; i < len; ++i)
          for (std::size_t j = 0; j < b; ++j) {
            buf_in[j * len + i] = vals[first + i * stride + j];
            buf_prev[j * len + i] = args[first + i * stride + j];
          }
        for (std::size_t j = 0; j < b; ++j)
          envelope_line(&buf_in[j * len], len, w, &buf_out[j * len], &buf_arg[j * len], ws);
        for (std::size_t i = 0; i < len; ++i)
          for (std::size_t j = 0; j < b; ++j) {
            vals[first + i * stride + j] = buf_out[j * len + i];
            args[first + i * stride + j] = buf_prev[j * len + buf_arg[j * len + i]];
          }
      }
  };

  // y and s lines stay inside one x slab, so when they run back to back
  // both finish while the slab is cached.
  const std::size_t slab = grid.Y * grid.S;
  auto slab_passes = [&](Axis a, Axis b) {
    for (std::size_t begin = 0; begin < n; begin += slab) {
      pass(a, begin, begin + slab);
      pass(b, begin, begin + slab);
    }
  };
  if (order[0] == Axis::x) {
    pass(Axis::x, 0, n);
    slab_passes(order[1], order[2]);
  } else if (order[2] == Axis::x) {
    slab_passes(order[0], order[1]);
    pass(Axis::x, 0, n);
  } else {
    for (Axis axis : order) pass(axis, 0, n);
  }
}

double grid_distance(const Grid3D& grid, std::size_t a, std::size_t b) {
  const auto ca = grid.coords(a);
  const auto cb = grid.coords(b);
  const double dx = static_cast<double>(ca[0]) - static_cast<double>(cb[0]);
  const double dy = static_cast<double>(ca[1]) - static_cast<double>(cb[1]);
  const double ds = static_cast<double>(ca[2]) - static_cast<double>(cb[2]);
  return grid.wx * dx * dx + grid.wy * dy * dy + grid.ws * ds * ds;
}

}  // namespace latfuse
