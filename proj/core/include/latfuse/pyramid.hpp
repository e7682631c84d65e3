#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "latfuse/core.hpp"
#include "latfuse/gdt.hpp"
#include "latfuse/tracking.hpp"

namespace latfuse {

/// pi(s): factor taking level-s cell coordinates to base-level cells.
struct ScaleMap {
  std::vector<double> factors;

  std::size_t size() const { return factors.size(); }
  double operator[](std::size_t s) const { return factors[s]; }
  bool uniform() const;
  void validate() const;

  friend bool operator==(const ScaleMap&, const ScaleMap&) = default;
};

struct PrismCell {
  std::size_t x = 0, y = 0, s = 0;
  friend bool operator==(const PrismCell&, const PrismCell&) = default;
};

/// Detection scores f over every (x, y, s) position of one frame.
///
/// Cell (x, y, s) is centered at stride * pi(s) * (x, y) in frame pixels and
/// realizes a box of template size scaled by level_scale[s]. The grid's own
/// weights are ignored; the tracker supplies them.
struct DetectionPrism {
  int frame = 0;
  Grid3D grid;
  ScaleMap scale_map;
  // Box size factor per level. Equals pi(s) for a raw pyramid; kept apart
  // so resampling can flatten pi without losing the box size.
  std::vector<double> level_scale;
  double stride = 1.0;
  double template_w = 1.0;
  double template_h = 1.0;
  double alpha = 1.0;

  void validate() const;
  PrismCell cell(std::size_t index) const;
  ScoredBox realize(std::size_t index) const;
  ScoredBox realize(const PrismCell& c) const { return realize(grid.index(c.x, c.y, c.s)); }
};

/// Squared distance (pi(s)x - pi(s')x')^2 + (pi(s)y - pi(s')y')^2 + alpha(s-s')^2,
/// in base-level cell units.
double prism_distance(const PrismCell& a, const PrismCell& b, const ScaleMap& map_a,
                      const ScaleMap& map_b, double alpha);

/// Nearest-neighbor resampling of every level onto one grid of
/// `reference_stride` pixels, so the output has pi(s) = 1 for all s.
/// Reference positions that fall outside a level's extent get kImpossible.
DetectionPrism resample_to_reference(const DetectionPrism& prism, double reference_stride);

struct PrismTrack {
  std::vector<PrismCell> cells;
  std::vector<std::size_t> indices;  // linear cell index per frame
  std::vector<ScoredBox> boxes;
  std::vector<FrameTerms> terms;
  double objective = 0.0;

  std::size_t size() const { return cells.size(); }
};

/// Maximizes sum f + sum g with g = -prism_distance over all cells of every
/// frame. Each frame costs one max-GDT with weights (pi^2, pi^2, alpha), so
/// O(T*X*Y*S). Prisms must share their geometry and a uniform scale map.
PrismTrack track_prisms(std::span<const DetectionPrism> prisms, double alpha);

/// Same objective with the all-pairs inner maximization, O(T*(X*Y*S)^2).
PrismTrack track_prisms_quadratic(std::span<const DetectionPrism> prisms, double alpha);

/// Terms and objective of a given cell sequence.
PrismTrack make_prism_track(std::span<const DetectionPrism> prisms,
                            std::span<const std::size_t> indices, double alpha);

/// Per-frame argmax cell, ignoring temporal coherency.
PrismTrack argmax_prism_track(std::span<const DetectionPrism> prisms, double alpha);

/// Throws std::invalid_argument unless all prisms share dims, scale map,
/// level scales, stride and template, with contiguous frames.
void check_shared_geometry(std::span<const DetectionPrism> prisms);

}  // namespace latfuse
