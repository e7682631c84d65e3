#include "latfuse/tracking.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "latfuse/error.hpp"

namespace latfuse {
namespace {

void check_contiguous(std::span<const FrameDetections> frames) {
  for (std::size_t t = 1; t < frames.size(); ++t)
    if (frames[t].frame() != frames[0].frame() + static_cast<int>(t))
      throw std::invalid_argument("frame indices must be contiguous");
}

void check_nonempty(std::span<const FrameDetections> frames) {
  if (frames.empty()) throw std::invalid_argument("no frames to track");
  for (std::size_t t = 0; t < frames.size(); ++t)
    if (frames[t].empty())
      throw InfeasibleError("frame " + std::to_string(frames[t].frame()) +
                            " has no detections");
}

}  // namespace

double coherency_g(const ScoredBox& prev, const ScoredBox& next,
                   const CoherencyParams& params) {
  if (next.frame != prev.frame + 1)
    throw std::invalid_argument("coherency_g: boxes are not in adjacent frames");
  const ScoredBox p = forward_project(prev, params.motion);
  const double dx = p.cx - next.cx;
  const double dy = p.cy - next.cy;
  const double sq = dx * dx + dy * dy;
  return params.g_form == GForm::negative_euclidean ? -std::sqrt(sq) : -sq;
}

double Track::f_sum() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.f;
  return s;
}

double Track::g_sum() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.g;
  return s;
}

Track make_track(std::span<const FrameDetections> frames,
                 std::span<const std::size_t> indices, const CoherencyParams& params) {
  if (indices.size() != frames.size())
    throw std::invalid_argument("make_track: one index per frame required");
  Track track;
  track.indices.assign(indices.begin(), indices.end());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (indices[t] >= frames[t].size())
      throw std::invalid_argument("make_track: index out of range");
    const ScoredBox& b = frames[t][indices[t]];
    FrameTerms terms{b.score, 0.0};
    if (t > 0) terms.g = coherency_g(track.picks.back(), b, params);
    track.picks.push_back(b);
    track.terms.push_back(terms);
  }
  track.objective = track.f_sum() + track.g_sum();
  return track;
}

Track viterbi_track(std::span<const FrameDetections> frames, const CoherencyParams& params) {
  check_nonempty(frames);
  check_contiguous(frames);

  const std::size_t T = frames.size();
  std::vector<std::vector<double>> delta(T);
  std::vector<std::vector<std::size_t>> back(T);

  delta[0].resize(frames[0].size());
  for (std::size_t j = 0; j < frames[0].size(); ++j) delta[0][j] = frames[0][j].score;

  for (std::size_t t = 1; t < T; ++t) {
    const auto& prev = frames[t - 1];
    const auto& cur = frames[t];
    delta[t].resize(cur.size());
    back[t].resize(cur.size());
    for (std::size_t j = 0; j < cur.size(); ++j) {
      double best = 0.0;
      std::size_t arg = 0;
      for (std::size_t jp = 0; jp < prev.size(); ++jp) {
        const double v = coherency_g(prev[jp], cur[j], params) + delta[t - 1][jp];
        if (jp == 0 || v > best) {
          best = v;
          arg = jp;
        }
      }
      delta[t][j] = cur[j].score + best;
      back[t][j] = arg;
    }
  }

  std::vector<std::size_t> idx(T);
  std::size_t j = 0;
  for (std::size_t i = 1; i < delta[T - 1].size(); ++i)
    if (delta[T - 1][i] > delta[T - 1][j]) j = i;
  for (std::size_t t = T; t-- > 0;) {
    idx[t] = j;
    if (t > 0) j = back[t][j];
  }
  return make_track(frames, idx, params);
}

std::vector<FrameDetections> augment_with_projections(
    std::span<const FrameDetections> frames, const CoherencyParams& params,
    bool project_missing) {
  if (frames.empty()) throw std::invalid_argument("no frames to track");
  check_contiguous(frames);
  if (frames[0].empty())
    throw InfeasibleError("frame " + std::to_string(frames[0].frame()) +
                          " has no detections and nothing to project into it");

  std::vector<FrameDetections> out;
  out.reserve(frames.size());
  out.push_back(frames[0]);
  for (std::size_t t = 1; t < frames.size(); ++t) {
    FrameDetections aug = frames[t];
    if (!project_missing || frames[t].empty()) {
      const FrameDetections& source = frames[t - 1].empty() ? out[t - 1] : frames[t - 1];
      for (const auto& b : source.boxes()) {
        ScoredBox p = forward_project(b, params.motion);
        p.score -= params.projection_penalty;
        p.projected = true;
        aug.add(p);
      }
    }
    out.push_back(std::move(aug));
  }
  return out;
}

Track viterbi_track_augmented(std::span<const FrameDetections> frames,
                              const CoherencyParams& params, bool project_missing) {
  const auto augmented = augment_with_projections(frames, params, project_missing);
  return viterbi_track(augmented, params);
}

Track greedy_track(std::span<const FrameDetections> frames, const CoherencyParams& params) {
  check_nonempty(frames);
  check_contiguous(frames);
  std::vector<std::size_t> idx(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < frames[t].size(); ++j)
      if (frames[t][j].score > frames[t][best].score) best = j;
    idx[t] = best;
  }
  return make_track(frames, idx, params);
}

}  // namespace latfuse
