#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "latfuse/core.hpp"
#include "latfuse/tracking.hpp"

namespace latfuse {

/// Frame extent used to normalize box centers into [0, 1].
struct FrameSize {
  double width = 1.0;
  double height = 1.0;
  friend bool operator==(const FrameSize&, const FrameSize&) = default;
};

inline constexpr std::size_t kFeatureDim = 4;
using Features = std::array<double, kFeatureDim>;

/// (cx / width, cy / height, log w, log h)
Features box_features(const ScoredBox& box, const FrameSize& frame);

struct StateEmission {
  enum class Kind { gaussian, uniform };

  Kind kind = Kind::gaussian;
  Features mean{};
  Features variance{1.0, 1.0, 1.0, 1.0};
  // Constant log density of a uniform state.
  double log_density = 0.0;

  static StateEmission gaussian(const Features& mean, const Features& variance);
  static StateEmission uniform(double log_density);

  friend bool operator==(const StateEmission&, const StateEmission&) = default;
};

/// Event model: K hidden states with log-domain initial and transition
/// probabilities and a per-state emission density over box features.
/// States are 0-based.
struct HmmModel {
  std::string name;
  FrameSize frame;
  std::vector<double> log_init;   // K
  std::vector<double> log_trans;  // K*K, row = previous state
  std::vector<StateEmission> emissions;

  std::size_t states() const { return log_init.size(); }
  double trans(std::size_t from, std::size_t to) const { return log_trans[from * states() + to]; }

  // Throws std::invalid_argument when a distribution does not normalize
  // within 1e-6 or an emission is malformed.
  void validate() const;

  /// Builds a model from plain probabilities, taking logs.
  static HmmModel from_probabilities(std::string name, FrameSize frame,
                                     const std::vector<double>& init,
                                     const std::vector<std::vector<double>>& trans,
                                     std::vector<StateEmission> emissions);

  friend bool operator==(const HmmModel&, const HmmModel&) = default;
};

/// h(k, b): log density of the box's features under state k.
double emission_logprob(const HmmModel& model, std::size_t k, const ScoredBox& box);

/// log sum over state sequences of exp(init + sum h + sum a).
double forward_log_likelihood(std::span<const ScoredBox> track, const HmmModel& model);

struct StateDecoding {
  std::vector<std::size_t> states;
  double score = 0.0;
};

/// Most probable state sequence (Viterbi) and its log score.
StateDecoding map_states(std::span<const ScoredBox> track, const HmmModel& model);

/// g for every adjacent-frame candidate pair, evaluated exactly once.
/// Shared across event models, since g does not depend on the model.
class CoherencyTable {
 public:
  CoherencyTable(std::span<const FrameDetections> frames, const CoherencyParams& params);

  // g between candidate `prev` of frame t-1 and candidate `cur` of frame t.
  double operator()(std::size_t t, std::size_t prev, std::size_t cur) const {
    return table_[t][prev * width_[t] + cur];
  }
  std::size_t evaluations() const { return evaluations_; }

 private:
  std::vector<std::vector<double>> table_;
  std::vector<std::size_t> width_;
  std::size_t evaluations_ = 0;
};

struct JointResult {
  Track track;
  std::vector<std::size_t> states;
  std::string event;
  double h_sum = 0.0;
  double a_sum = 0.0;     // transitions only
  double init_term = 0.0; // log_init of the first state
  double objective = 0.0; // f + g + h + a + init
  // g evaluations performed while computing this result.
  std::size_t g_evaluations = 0;
};

/// How the inner maximization over (j', k') is arranged.
/// factored: max_j' ( g(j',j) + max_k' (a(k',k) + delta(j',k')) ), one g per (j', j).
/// unfactored: max_j' max_k' ( g(j',j) + (a(k',k) + delta(j',k')) ), one g per (j', j, k, k').
enum class JointForm { factored, unfactored };

/// Joint MAP over tracks and state sequences on the detections x states
/// lattice. Throws InfeasibleError for an empty frame.
JointResult joint_track_event(std::span<const FrameDetections> frames, const HmmModel& model,
                              const CoherencyParams& params,
                              JointForm form = JointForm::factored);

/// Factored joint decoding against a prebuilt g table.
JointResult joint_track_event(std::span<const FrameDetections> frames, const HmmModel& model,
                              const CoherencyParams& params, const CoherencyTable& table);

struct MultiJointResult {
  std::vector<JointResult> results;  // by objective, descending; ties by name
  std::size_t g_evaluations = 0;
};

/// One joint decoding per model over a single shared g table.
MultiJointResult joint_multi_model(std::span<const FrameDetections> frames,
                                   std::span<const HmmModel> models,
                                   const CoherencyParams& params);

/// Recomputes h, a and init for a fixed track and state sequence.
void fill_event_terms(JointResult& result, const HmmModel& model);

enum class ClassifyMode { ml, map, joint };

struct RankedLabel {
  std::string label;
  double score = 0.0;
};

/// Ranks models on a fixed track by forward likelihood (ml) or MAP score
/// (map). Descending score, ties by name. Throws on an empty model list or
/// ClassifyMode::joint.
std::vector<RankedLabel> classify(std::span<const ScoredBox> track,
                                  std::span<const HmmModel> models, ClassifyMode mode);

/// Ranks models by their joint track+event objective.
std::vector<RankedLabel> classify(std::span<const FrameDetections> frames,
                                  std::span<const HmmModel> models,
                                  const CoherencyParams& params);

/// Stable log(sum exp(v)); -inf for empty or all -inf input.
double log_sum_exp(std::span<const double> v);

}  // namespace latfuse
