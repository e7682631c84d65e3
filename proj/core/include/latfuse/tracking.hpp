#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "latfuse/core.hpp"

namespace latfuse {

enum class GForm { negative_euclidean, negative_squared_euclidean };

struct CoherencyParams {
  MotionModel motion;
  GForm g_form = GForm::negative_euclidean;
  // Subtracted from the score of every forward-projected box.
  double projection_penalty = 0.0;
};

/// Temporal coherency g: minus the (squared) distance between the center of
/// `prev` projected one frame forward and the center of `next`.
/// Throws std::invalid_argument unless next.frame == prev.frame + 1.
double coherency_g(const ScoredBox& prev, const ScoredBox& next,
                   const CoherencyParams& params);

struct FrameTerms {
  double f = 0.0;
  double g = 0.0;  // zero in the first frame
};

/// One box per frame plus the objective sum f + g that selected it.
struct Track {
  std::vector<ScoredBox> picks;
  // Index of each pick within its frame's candidate list.
  std::vector<std::size_t> indices;
  std::vector<FrameTerms> terms;
  double objective = 0.0;

  std::size_t size() const { return picks.size(); }
  double f_sum() const;
  double g_sum() const;
};

/// Exact maximizer of sum_t f(b_t) + sum_{t>=1} g(b_{t-1}, b_t) by Viterbi,
/// O(T*J^2). Frames must be contiguous. Ties resolve to the smaller
/// candidate index, latest frame first.
///
/// Throws InfeasibleError("frame t has no detections") for an empty frame.
Track viterbi_track(std::span<const FrameDetections> frames, const CoherencyParams& params);

/// Adds forward-projected copies of the previous frame's boxes before
/// tracking. With `project_missing` only empty frames are filled; otherwise
/// every frame after the first is augmented. Projections come from the raw
/// previous frame, or from its augmented set when it had no raw boxes.
std::vector<FrameDetections> augment_with_projections(
    std::span<const FrameDetections> frames, const CoherencyParams& params,
    bool project_missing);

Track viterbi_track_augmented(std::span<const FrameDetections> frames,
                              const CoherencyParams& params, bool project_missing);

/// Best box in each frame independently; g terms are still reported.
Track greedy_track(std::span<const FrameDetections> frames, const CoherencyParams& params);

/// Recomputes the terms and objective of a given selection.
Track make_track(std::span<const FrameDetections> frames,
                 std::span<const std::size_t> indices, const CoherencyParams& params);

}  // namespace latfuse
