#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace latfuse {

/// One candidate detection: a center+size box in frame pixels carrying a
/// log-domain detection score.
struct ScoredBox {
  int frame = 0;
  double cx = 0.0;
  double cy = 0.0;
  double w = 1.0;
  double h = 1.0;
  double score = 0.0;
  int source_id = 0;
  // Set on boxes synthesized by forward projection rather than a detector.
  bool projected = false;

  friend bool operator==(const ScoredBox&, const ScoredBox&) = default;
};

/// Throws std::invalid_argument unless w > 0, h > 0 and every field is finite.
void validate(const ScoredBox& box);

/// All candidate detections of one frame. The list may be empty.
class FrameDetections {
 public:
  FrameDetections() = default;
  explicit FrameDetections(int frame, std::vector<ScoredBox> boxes = {});

  int frame() const { return frame_; }
  const std::vector<ScoredBox>& boxes() const { return boxes_; }
  std::size_t size() const { return boxes_.size(); }
  bool empty() const { return boxes_.empty(); }
  const ScoredBox& operator[](std::size_t i) const { return boxes_[i]; }

  // The box's frame must match.
  void add(const ScoredBox& box);

  friend bool operator==(const FrameDetections&, const FrameDetections&) = default;

 private:
  int frame_ = 0;
  std::vector<ScoredBox> boxes_;
};

/// Stand-in for an optical-flow/KLT projection of a box into the next frame.
struct MotionModel {
  enum class Kind { identity, constant_velocity };

  Kind kind = Kind::identity;
  double vx = 0.0;
  double vy = 0.0;

  static MotionModel identity() { return {}; }
  static MotionModel constant_velocity(double vx, double vy);
};

ScoredBox forward_project(const ScoredBox& box, const MotionModel& model);

/// Per-source score offset: the lesser of the Otsu bipartition threshold of
/// `scores` and `trained_threshold + epsilon`.
///
/// The histogram has kOtsuBins equal-width bins over [min, max]; candidate
/// thresholds are the interior bin boundaries and ties go to the lowest one.
/// When every score is equal the common value is the bipartition threshold.
/// Throws std::invalid_argument("no scores to normalize") on empty input.
double otsu_offset(std::span<const double> scores, double trained_threshold,
                   double epsilon);

/// The Otsu bipartition threshold alone (the first operand of otsu_offset).
double otsu_threshold(std::span<const double> scores);

inline constexpr int kOtsuBins = 64;
inline constexpr double kDefaultOtsuEpsilon = 1.0;

/// Score of the best box in each non-empty frame; the histogram input for
/// otsu_offset.
std::vector<double> top_scores(std::span<const FrameDetections> frames);

struct SourceDetections {
  FrameDetections detections;
  double offset = 0.0;
};

/// Union of all sources' boxes for `frame`, each score reduced by its
/// source's offset. Source order, then within-source order.
FrameDetections pool_detections(int frame, std::span<const SourceDetections> sources);

/// The k best boxes, descending by score; equal scores keep input order.
FrameDetections top_k(const FrameDetections& dets, std::size_t k);

}  // namespace latfuse
