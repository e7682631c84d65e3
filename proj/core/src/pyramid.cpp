#include "latfuse/pyramid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace latfuse {

bool ScaleMap::uniform() const {
  for (double f : factors)
    if (f != factors.front()) return false;
  return true;
}

void ScaleMap::validate() const {
  if (factors.empty()) throw std::invalid_argument("scale map is empty");
  for (double f : factors)
    if (!(f > 0.0) || !std::isfinite(f))
      throw std::invalid_argument("scale factors must be finite and positive");
}

void DetectionPrism::validate() const {
  grid.validate();
  scale_map.validate();
  if (scale_map.size() != grid.S)
    throw std::invalid_argument("scale map length does not match the prism's S dimension");
  if (!level_scale.empty() && level_scale.size() != grid.S)
    throw std::invalid_argument("level scale length does not match the prism's S dimension");
  for (double f : level_scale)
    if (!(f > 0.0) || !std::isfinite(f))
      throw std::invalid_argument("level scales must be finite and positive");
  if (!(stride > 0.0) || !std::isfinite(stride))
    throw std::invalid_argument("prism stride must be positive");
  if (!(template_w > 0.0) || !(template_h > 0.0))
    throw std::invalid_argument("prism template size must be positive");
  if (!std::isfinite(alpha) || alpha < 0.0)
    throw std::invalid_argument("alpha must be finite and non-negative");
}

PrismCell DetectionPrism::cell(std::size_t index) const {
  const auto c = grid.coords(index);
  return {c[0], c[1], c[2]};
}

ScoredBox DetectionPrism::realize(std::size_t index) const {
  const PrismCell c = cell(index);
  const double pi = scale_map[c.s];
  const double size = level_scale.empty() ? pi : level_scale[c.s];
  ScoredBox b;
  b.frame = frame;
  b.cx = stride * pi * static_cast<double>(c.x);
  b.cy = stride * pi * static_cast<double>(c.y);
  b.w = template_w * size;
  b.h = template_h * size;
  b.score = grid.values[index];
  return b;
}

double prism_distance(const PrismCell& a, const PrismCell& b, const ScaleMap& map_a,
                      const ScaleMap& map_b, double alpha) {
  const double pa = map_a[a.s];
  const double pb = map_b[b.s];
  const double dx = pa * static_cast<double>(a.x) - pb * static_cast<double>(b.x);
  const double dy = pa * static_cast<double>(a.y) - pb * static_cast<double>(b.y);
  const double ds = static_cast<double>(a.s) - static_cast<double>(b.s);
  return dx * dx + dy * dy + alpha * ds * ds;
}

DetectionPrism resample_to_reference(const DetectionPrism& prism, double reference_stride) {
  if (!(reference_stride > 0.0) || !std::isfinite(reference_stride))
    throw std::invalid_argument("reference stride must be positive");
  prism.validate();

  const auto& g = prism.grid;
  double extent_x = 0.0, extent_y = 0.0;
  for (std::size_t s = 0; s < g.S; ++s) {
    const double px = prism.stride * prism.scale_map[s];
    extent_x = std::max(extent_x, px * static_cast<double>(g.X - 1));
    extent_y = std::max(extent_y, px * static_cast<double>(g.Y - 1));
  }
  // The small slack keeps exact multiples of the stride from rounding down.
  const auto X = static_cast<std::size_t>(std::floor(extent_x / reference_stride + 1e-9)) + 1;
  const auto Y = static_cast<std::size_t>(std::floor(extent_y / reference_stride + 1e-9)) + 1;

  DetectionPrism out;
  out.frame = prism.frame;
  out.grid = Grid3D(X, Y, g.S, kImpossible);
  out.scale_map.factors.assign(g.S, 1.0);
  out.level_scale = prism.level_scale.empty() ? prism.scale_map.factors : prism.level_scale;
  out.stride = reference_stride;
  out.template_w = prism.template_w;
  out.template_h = prism.template_h;
  out.alpha = prism.alpha;

  auto nearest = [](double u, std::size_t n) -> long {
    const double r = std::floor(u + 0.5);
    if (r < 0.0 || r > static_cast<double>(n - 1)) return -1;
    return static_cast<long>(r);
  };
  for (std::size_t s = 0; s < g.S; ++s) {
    const double level_px = prism.stride * prism.scale_map[s];
    for (std::size_t x = 0; x < X; ++x) {
      const long ix = nearest(static_cast<double>(x) * reference_stride / level_px, g.X);
      if (ix < 0) continue;
      for (std::size_t y = 0; y < Y; ++y) {
        const long iy = nearest(static_cast<double>(y) * reference_stride / level_px, g.Y);
        if (iy < 0) continue;
        out.grid.at(x, y, s) = g.at(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy), s);
      }
    }
  }
  return out;
}

void check_shared_geometry(std::span<const DetectionPrism> prisms) {
  if (prisms.empty()) throw std::invalid_argument("no prisms to track");
  const auto& p0 = prisms[0];
  p0.validate();
  for (std::size_t t = 1; t < prisms.size(); ++t) {
    const auto& p = prisms[t];
    p.validate();
    if (p.grid.X != p0.grid.X || p.grid.Y != p0.grid.Y || p.grid.S != p0.grid.S)
      throw std::invalid_argument("prism " + std::to_string(t) + " dimensions differ from frame 0");
    if (!(p.scale_map == p0.scale_map) || p.level_scale != p0.level_scale ||
        p.stride != p0.stride || p.template_w != p0.template_w ||
        p.template_h != p0.template_h)
      throw std::invalid_argument("prism " + std::to_string(t) + " geometry differs from frame 0");
    if (p.frame != p0.frame + static_cast<int>(t))
      throw std::invalid_argument("prism frame indices must be contiguous");
  }
}

PrismTrack make_prism_track(std::span<const DetectionPrism> prisms,
                            std::span<const std::size_t> indices, double alpha) {
  if (indices.size() != prisms.size())
    throw std::invalid_argument("make_prism_track: one cell per frame required");
  PrismTrack track;
  for (std::size_t t = 0; t < prisms.size(); ++t) {
    const std::size_t idx = indices[t];
    if (idx >= prisms[t].grid.size()) throw std::invalid_argument("cell index out of range");
    const PrismCell c = prisms[t].cell(idx);
    FrameTerms terms{prisms[t].grid.values[idx], 0.0};
    if (t > 0)
      terms.g = -prism_distance(track.cells.back(), c, prisms[t - 1].scale_map,
                                prisms[t].scale_map, alpha);
    track.cells.push_back(c);
    track.indices.push_back(idx);
    track.boxes.push_back(prisms[t].realize(idx));
    track.terms.push_back(terms);
  }
  double f = 0.0, g = 0.0;
  for (const auto& t : track.terms) {
    f += t.f;
    g += t.g;
  }
  track.objective = f + g;
  return track;
}

namespace {

void check_tracker_inputs(std::span<const DetectionPrism> prisms, double alpha) {
  check_shared_geometry(prisms);
  if (!prisms[0].scale_map.uniform())
    throw std::invalid_argument(
        "prism scale map is not uniform; resample to a reference grid first");
  if (!std::isfinite(alpha) || alpha < 0.0)
    throw std::invalid_argument("alpha must be finite and non-negative");
}

std::size_t argmax_index(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

std::vector<std::size_t> backtrack(const std::vector<double>& last,
                                   const std::vector<std::vector<std::size_t>>& back) {
  const std::size_t T = back.size();
  std::vector<std::size_t> idx(T);
  std::size_t c = argmax_index(last);
  for (std::size_t t = T; t-- > 0;) {
    idx[t] = c;
    if (t > 0) c = back[t][c];
  }
  return idx;
}

}  // namespace

PrismTrack track_prisms(std::span<const DetectionPrism> prisms, double alpha) {
  check_tracker_inputs(prisms, alpha);
  const std::size_t T = prisms.size();
  const double pi = prisms[0].scale_map[0];

  Grid3D delta = prisms[0].grid;
  delta.wx = delta.wy = pi * pi;
  delta.ws = alpha;
  std::vector<std::vector<std::size_t>> back(T);
  Transform3D tr;

  for (std::size_t t = 1; t < T; ++t) {
    transform_3d(delta, tr);
    const auto& f = prisms[t].grid.values;
    for (std::size_t c = 0; c < f.size(); ++c) delta.values[c] = f[c] + tr.transformed.values[c];
    back[t] = tr.argmax;
  }
  return make_prism_track(prisms, backtrack(delta.values, back), alpha);
}

PrismTrack track_prisms_quadratic(std::span<const DetectionPrism> prisms, double alpha) {
  check_tracker_inputs(prisms, alpha);
  const std::size_t T = prisms.size();
  const auto& g0 = prisms[0].grid;
  const std::size_t n = g0.size();
  const double pi = prisms[0].scale_map[0];

  std::vector<double> px(n), py(n), ps(n);
  for (std::size_t c = 0; c < n; ++c) {
    const auto xyz = g0.coords(c);
    px[c] = pi * static_cast<double>(xyz[0]);
    py[c] = pi * static_cast<double>(xyz[1]);
    ps[c] = static_cast<double>(xyz[2]);
  }

  std::vector<double> delta = g0.values, next(n);
  std::vector<std::vector<std::size_t>> back(T);
  for (std::size_t t = 1; t < T; ++t) {
    back[t].resize(n);
    const auto& f = prisms[t].grid.values;
    for (std::size_t c = 0; c < n; ++c) {
      double best = 0.0;
      std::size_t arg = 0;
      for (std::size_t cp = 0; cp < n; ++cp) {
        const double dx = px[cp] - px[c];
        const double dy = py[cp] - py[c];
        const double ds = ps[cp] - ps[c];
        const double v = delta[cp] - (dx * dx + dy * dy + alpha * ds * ds);
        if (cp == 0 || v > best) {
          best = v;
          arg = cp;
        }
      }
      next[c] = f[c] + best;
      back[t][c] = arg;
    }
    std::swap(delta, next);
  }
  return make_prism_track(prisms, backtrack(delta, back), alpha);
}

PrismTrack argmax_prism_track(std::span<const DetectionPrism> prisms, double alpha) {
  check_shared_geometry(prisms);
  std::vector<std::size_t> idx;
  for (const auto& p : prisms) idx.push_back(argmax_index(p.grid.values));
  return make_prism_track(prisms, idx, alpha);
}

}  // namespace latfuse
