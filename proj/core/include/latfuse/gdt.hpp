#pragma once

// Generalized distance transform with a quadratic distance, max-domain:
//
//   D(q) = max_p ( phi(p) - d(p, q) ),   d separable and quadratic per axis.
//
// Each 1-D pass is the lower-envelope-of-parabolas algorithm run on -phi,
// so a full 3-D transform costs O(X*Y*S).

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace latfuse {

// Marks cells that no track may pass through. Finite so the parabola
// intersections stay finite.
inline constexpr double kImpossible = -1e30;

struct Envelope1D {
  std::vector<double> value;
  std::vector<std::size_t> argmax;
};

/// value[q] = max_p values[p] - weight*(p-q)^2. Ties go to the smaller p.
Envelope1D envelope_1d(std::span<const double> values, double weight);

enum class Axis { x, y, s };

/// Dense score grid over (x, y, s). Cell (x, y, s) lives at
/// index (x*Y + y)*S + s.
struct Grid3D {
  std::size_t X = 0, Y = 0, S = 0;
  std::vector<double> values;
  double wx = 1.0, wy = 1.0, ws = 1.0;

  Grid3D() = default;
  Grid3D(std::size_t x, std::size_t y, std::size_t s, double fill = 0.0);

  std::size_t size() const { return values.size(); }
  std::size_t index(std::size_t x, std::size_t y, std::size_t s) const {
    return (x * Y + y) * S + s;
  }
  std::array<std::size_t, 3> coords(std::size_t idx) const {
    return {idx / (Y * S), (idx / S) % Y, idx % S};
  }
  double& at(std::size_t x, std::size_t y, std::size_t s) { return values[index(x, y, s)]; }
  double at(std::size_t x, std::size_t y, std::size_t s) const { return values[index(x, y, s)]; }

  // Throws std::invalid_argument on a size mismatch or bad weights.
  void validate() const;
};

struct Transform3D {
  Grid3D transformed;
  // Linear index of the source cell attaining transformed[q].
  std::vector<std::size_t> argmax;
};

inline constexpr std::array<Axis, 3> kDefaultPassOrder{Axis::x, Axis::y, Axis::s};

/// transformed[q] = max_p values[p] - wx*dx^2 - wy*dy^2 - ws*ds^2, as three
/// sequential 1-D passes in `order`. Weights of the result are copied from
/// the input.
Transform3D transform_3d(const Grid3D& grid,
                         std::array<Axis, 3> order = kDefaultPassOrder);

/// Same, writing into `out` and reusing its storage.
void transform_3d(const Grid3D& grid, Transform3D& out,
                  std::array<Axis, 3> order = kDefaultPassOrder);

/// Quadratic distance between two cells under the grid's weights.
double grid_distance(const Grid3D& grid, std::size_t a, std::size_t b);

}  // namespace latfuse
