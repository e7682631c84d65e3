#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "latfuse/core.hpp"
#include "latfuse/events.hpp"
#include "latfuse/pyramid.hpp"

namespace latfuse {

/// Platform-independent random stream: mt19937_64 bits with hand-written
/// transforms, since the std distributions differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                     // [0, 1)
  double uniform(double lo, double hi);
  double normal(double mean, double sd);
  std::uint64_t poisson(double mean);
  std::size_t index(std::size_t n);     // [0, n)
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Synthetic video: one object moving at constant velocity, observed through
/// a noisy detector (box lists) or a dense score prism.
struct Scenario {
  std::uint64_t seed = 1;
  FrameSize frame{320.0, 240.0};
  int frames = 20;

  // Ground truth, clamped to the frame.
  double start_x = 40.0;
  double start_y = 120.0;
  double vx = 8.0;
  double vy = 0.0;
  double box_w = 24.0;
  double box_h = 48.0;

  // Detection lists.
  double fp_rate = 2.0;   // Poisson mean false positives per frame
  double dropout = 0.0;   // probability the true box is missed
  double jitter = 1.0;    // center jitter sd, pixels
  double true_score_mean = 2.0;
  double true_score_sd = 0.25;
  double fp_score_mean = 0.0;
  double fp_score_sd = 0.25;

  // Prisms.
  double stride = 8.0;
  int levels = 3;
  double level_ratio = 1.25;  // box size factor between adjacent levels
  int true_level = 1;
  double bump_width = 1.0;    // sd of the bump across x and y, cells
  double bump_amplitude = 3.0;
  double dropout_amplitude = 0.5;  // bump amplitude in dropped frames
  int distractors = 2;             // distractor bumps per frame
  double distractor_amplitude = 2.0;
  double noise_floor = 0.2;        // sd of additive per-cell noise

  void validate() const;
  std::vector<ScoredBox> ground_truth() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct SynthDetections {
  std::vector<FrameDetections> frames;
  std::vector<ScoredBox> truth;
  std::vector<bool> dropped;
};

struct SynthPrisms {
  std::vector<DetectionPrism> prisms;
  std::vector<ScoredBox> truth;
  std::vector<PrismCell> true_cells;
  std::vector<bool> dropped;
};

SynthDetections gen_detections(const Scenario& sc);

/// Prisms arrive on the reference grid (pi = 1) with level box sizes
/// level_ratio^s, and the template chosen so true_level realizes the
/// ground-truth box size.
SynthPrisms gen_prisms(const Scenario& sc);

/// Hand-specified event models: "translate-right", "stationary",
/// "approach-then-carry". Box-size emissions center on the given size.
std::vector<HmmModel> fixture_models(FrameSize frame = {320.0, 240.0}, double box_w = 24.0,
                                     double box_h = 48.0);

}  // namespace latfuse
