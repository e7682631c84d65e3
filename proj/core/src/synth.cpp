#include "latfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace latfuse {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal(double mean, double sd) {
  // Box-Muller; one draw per call keeps the stream position simple.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  if (mean > 30.0) return static_cast<std::uint64_t>(std::max(0.0, std::round(normal(mean, std::sqrt(mean)))));
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double p = uniform();
  while (p > limit) {
    ++k;
    p *= uniform();
  }
  return k;
}

std::size_t Rng::index(std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

void Scenario::validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  };
  prob(dropout, "dropout");
  if (frames < 1) throw std::invalid_argument("scenario needs at least one frame");
  if (!(frame.width > 0.0) || !(frame.height > 0.0))
    throw std::invalid_argument("frame size must be positive");
  if (!(box_w > 0.0) || !(box_h > 0.0)) throw std::invalid_argument("box size must be positive");
  if (fp_rate < 0.0) throw std::invalid_argument("fp_rate must be non-negative");
  if (jitter < 0.0 || true_score_sd < 0.0 || fp_score_sd < 0.0 || noise_floor < 0.0)
    throw std::invalid_argument("standard deviations must be non-negative");
  if (!(stride > 0.0)) throw std::invalid_argument("stride must be positive");
  if (levels < 1 || true_level < 0 || true_level >= levels)
    throw std::invalid_argument("true_level must index one of the levels");
  if (!(level_ratio > 0.0)) throw std::invalid_argument("level_ratio must be positive");
  if (!(bump_width > 0.0)) throw std::invalid_argument("bump_width must be positive");
  if (distractors < 0) throw std::invalid_argument("distractors must be non-negative");
}

std::vector<ScoredBox> Scenario::ground_truth() const {
  std::vector<ScoredBox> out;
  for (int t = 0; t < frames; ++t) {
    ScoredBox b;
    b.frame = t;
    b.cx = std::clamp(start_x + vx * t, 0.0, frame.width);
    b.cy = std::clamp(start_y + vy * t, 0.0, frame.height);
    b.w = box_w;
    b.h = box_h;
    out.push_back(b);
  }
  return out;
}

SynthDetections gen_detections(const Scenario& sc) {
  sc.validate();
  Rng rng(sc.seed);
  SynthDetections out;
  out.truth = sc.ground_truth();
  for (int t = 0; t < sc.frames; ++t) {
    std::vector<ScoredBox> boxes;
    const bool dropped = rng.bernoulli(sc.dropout);
    out.dropped.push_back(dropped);
    const auto n_fp = rng.poisson(sc.fp_rate);
    for (std::uint64_t i = 0; i < n_fp; ++i) {
      ScoredBox b;
      b.frame = t;
      b.cx = rng.uniform(0.0, sc.frame.width);
      b.cy = rng.uniform(0.0, sc.frame.height);
      b.w = sc.box_w;
      b.h = sc.box_h;
      b.score = rng.normal(sc.fp_score_mean, sc.fp_score_sd);
      boxes.push_back(b);
    }
    if (!dropped) {
      ScoredBox b = out.truth[t];
      if (sc.jitter > 0.0) {
        b.cx += rng.normal(0.0, sc.jitter);
        b.cy += rng.normal(0.0, sc.jitter);
      }
      b.score = rng.normal(sc.true_score_mean, sc.true_score_sd);
      const std::size_t at = rng.index(boxes.size() + 1);
      boxes.insert(boxes.begin() + static_cast<std::ptrdiff_t>(at), b);
    }
    out.frames.emplace_back(t, std::move(boxes));
  }
  return out;
}

SynthPrisms gen_prisms(const Scenario& sc) {
  sc.validate();
  Rng rng(sc.seed);
  SynthPrisms out;
  out.truth = sc.ground_truth();

  const auto X = static_cast<std::size_t>(std::floor(sc.frame.width / sc.stride)) + 1;
  const auto Y = static_cast<std::size_t>(std::floor(sc.frame.height / sc.stride)) + 1;
  const auto S = static_cast<std::size_t>(sc.levels);
  std::vector<double> level_scale(S);
  for (std::size_t s = 0; s < S; ++s) level_scale[s] = std::pow(sc.level_ratio, static_cast<double>(s));
  const double true_scale = level_scale[static_cast<std::size_t>(sc.true_level)];

  const double wxy = 2.0 * sc.bump_width * sc.bump_width;
  constexpr double ws = 2.0 * 0.75 * 0.75;
  auto add_bump = [&](Grid3D& g, double x0, double y0, double s0, double amp) {
    for (std::size_t x = 0; x < X; ++x)
      for (std::size_t y = 0; y < Y; ++y)
        for (std::size_t s = 0; s < S; ++s) {
          const double dx = static_cast<double>(x) - x0;
          const double dy = static_cast<double>(y) - y0;
          const double ds = static_cast<double>(s) - s0;
          g.at(x, y, s) += amp * std::exp(-(dx * dx + dy * dy) / wxy - ds * ds / ws);
        }
  };

  for (int t = 0; t < sc.frames; ++t) {
    DetectionPrism p;
    p.frame = t;
    p.grid = Grid3D(X, Y, S, 0.0);
    p.scale_map.factors.assign(S, 1.0);
    p.level_scale = level_scale;
    p.stride = sc.stride;
    p.template_w = sc.box_w / true_scale;
    p.template_h = sc.box_h / true_scale;

    if (sc.noise_floor > 0.0)
      for (double& v : p.grid.values) v = rng.normal(0.0, sc.noise_floor);

    const bool dropped = rng.bernoulli(sc.dropout);
    out.dropped.push_back(dropped);
    const double x0 = out.truth[t].cx / sc.stride;
    const double y0 = out.truth[t].cy / sc.stride;
    add_bump(p.grid, x0, y0, sc.true_level, dropped ? sc.dropout_amplitude : sc.bump_amplitude);
    for (int d = 0; d < sc.distractors; ++d) {
      const double dx = rng.uniform(0.0, static_cast<double>(X - 1));
      const double dy = rng.uniform(0.0, static_cast<double>(Y - 1));
      const double ds = static_cast<double>(rng.index(S));
      add_bump(p.grid, dx, dy, ds, sc.distractor_amplitude);
    }
    out.true_cells.push_back({static_cast<std::size_t>(std::lround(x0)),
                              static_cast<std::size_t>(std::lround(y0)),
                              static_cast<std::size_t>(sc.true_level)});
    out.prisms.push_back(std::move(p));
  }
  return out;
}

std::vector<HmmModel> fixture_models(FrameSize frame, double box_w, double box_h) {
  const double lw = std::log(box_w);
  const double lh = std::log(box_h);
  auto state = [&](double x, double y, double vx, double vy) {
    return StateEmission::gaussian({x, y, lw, lh}, {vx, vy, 0.05, 0.05});
  };

  std::vector<HmmModel> out;
  out.push_back(HmmModel::from_probabilities(
      "translate-right", frame, {0.9, 0.05, 0.05},
      {{0.8, 0.2, 0.0}, {0.0, 0.8, 0.2}, {0.0, 0.0, 1.0}},
      {state(0.2, 0.5, 0.02, 0.05), state(0.5, 0.5, 0.02, 0.05), state(0.8, 0.5, 0.02, 0.05)}));
  out.push_back(HmmModel::from_probabilities(
      "stationary", frame, {0.5, 0.5}, {{0.9, 0.1}, {0.1, 0.9}},
      {state(0.5, 0.5, 0.01, 0.01), state(0.5, 0.5, 0.01, 0.01)}));
  // The agent closes in on a resting object, touches it, then both move off.
  out.push_back(HmmModel::from_probabilities(
      "approach-then-carry", frame, {0.85, 0.05, 0.05, 0.05},
      {{0.7, 0.3, 0.0, 0.0}, {0.0, 0.7, 0.3, 0.0}, {0.0, 0.0, 0.7, 0.3}, {0.0, 0.0, 0.0, 1.0}},
      {state(0.25, 0.5, 0.02, 0.05), state(0.45, 0.5, 0.01, 0.05), state(0.55, 0.5, 0.01, 0.05),
       state(0.75, 0.5, 0.02, 0.05)}));
  return out;
}

}  // namespace latfuse
