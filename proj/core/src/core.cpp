#include "latfuse/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace latfuse {

void validate(const ScoredBox& box) {
  if (!std::isfinite(box.cx) || !std::isfinite(box.cy))
    throw std::invalid_argument("box center must be finite");
  if (!(box.w > 0.0) || !(box.h > 0.0) || !std::isfinite(box.w) || !std::isfinite(box.h))
    throw std::invalid_argument("box width and height must be finite and positive");
  if (!std::isfinite(box.score))
    throw std::invalid_argument("box score must be finite");
}

FrameDetections::FrameDetections(int frame, std::vector<ScoredBox> boxes)
    : frame_(frame), boxes_(std::move(boxes)) {
  for (const auto& b : boxes_) {
    if (b.frame != frame_)
      throw std::invalid_argument("box frame " + std::to_string(b.frame) +
                                  " does not match frame " + std::to_string(frame_));
    validate(b);
  }
}

void FrameDetections::add(const ScoredBox& box) {
  if (box.frame != frame_)
    throw std::invalid_argument("box frame " + std::to_string(box.frame) +
                                " does not match frame " + std::to_string(frame_));
  validate(box);
  boxes_.push_back(box);
}

MotionModel MotionModel::constant_velocity(double vx, double vy) {
  if (!std::isfinite(vx) || !std::isfinite(vy))
    throw std::invalid_argument("velocity must be finite");
  return {Kind::constant_velocity, vx, vy};
}

ScoredBox forward_project(const ScoredBox& box, const MotionModel& model) {
  ScoredBox out = box;
  out.frame = box.frame + 1;
  if (model.kind == MotionModel::Kind::constant_velocity) {
    out.cx += model.vx;
    out.cy += model.vy;
  }
  return out;
}

double otsu_threshold(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("no scores to normalize");
  for (double s : scores)
    if (!std::isfinite(s)) throw std::invalid_argument("scores must be finite");

  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) return lo;

  const double width = (hi - lo) / kOtsuBins;
  std::array<double, kOtsuBins> count{};
  std::array<double, kOtsuBins> sum{};
  for (double s : scores) {
    int bin = static_cast<int>((s - lo) / width);
    bin = std::clamp(bin, 0, kOtsuBins - 1);
    count[bin] += 1.0;
    sum[bin] += s;
  }

  const double n = static_cast<double>(scores.size());
  const double total = std::accumulate(sum.begin(), sum.end(), 0.0);
  double below_n = 0.0;
  double below_sum = 0.0;
  double best_var = -1.0;
  int best_cut = 1;
  for (int cut = 1; cut < kOtsuBins; ++cut) {
    below_n += count[cut - 1];
    below_sum += sum[cut - 1];
    const double above_n = n - below_n;
    double var = 0.0;
    if (below_n > 0.0 && above_n > 0.0) {
      const double m0 = below_sum / below_n;
      const double m1 = (total - below_sum) / above_n;
      var = (below_n / n) * (above_n / n) * (m0 - m1) * (m0 - m1);
    }
    if (var > best_var) {
      best_var = var;
      best_cut = cut;
    }
  }
  return lo + best_cut * width;
}

double otsu_offset(std::span<const double> scores, double trained_threshold,
                   double epsilon) {
  return std::min(otsu_threshold(scores), trained_threshold + epsilon);
}

std::vector<double> top_scores(std::span<const FrameDetections> frames) {
  std::vector<double> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    if (f.empty()) continue;
    double best = f[0].score;
    for (const auto& b : f.boxes()) best = std::max(best, b.score);
    out.push_back(best);
  }
  return out;
}

FrameDetections pool_detections(int frame, std::span<const SourceDetections> sources) {
  FrameDetections out(frame);
  for (const auto& src : sources) {
    if (src.detections.frame() != frame)
      throw std::invalid_argument("pool_detections: source frame " +
                                  std::to_string(src.detections.frame()) +
                                  " does not match frame " + std::to_string(frame));
    for (ScoredBox b : src.detections.boxes()) {
      b.score -= src.offset;
      out.add(b);
    }
  }
  return out;
}

FrameDetections top_k(const FrameDetections& dets, std::size_t k) {
  if (k == 0) throw std::invalid_argument("top_k: k must be at least 1");
  std::vector<ScoredBox> boxes = dets.boxes();
  std::stable_sort(boxes.begin(), boxes.end(),
                   [](const ScoredBox& a, const ScoredBox& b) { return a.score > b.score; });
  if (boxes.size() > k) boxes.resize(k);
  return FrameDetections(dets.frame(), std::move(boxes));
}

}  // namespace latfuse
