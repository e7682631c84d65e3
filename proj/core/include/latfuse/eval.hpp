#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "latfuse/core.hpp"

namespace latfuse {

/// Axis-aligned box by corners.
struct Rect {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

  double area() const { return (x2 - x1) * (y2 - y1); }
  friend bool operator==(const Rect&, const Rect&) = default;
};

Rect to_rect(const ScoredBox& box);

/// Intersection over union. Throws std::invalid_argument on a box with
/// non-positive area.
double overlap(const Rect& a, const Rect& b);

enum class TrackClass { person, nonperson };

/// "person" and "human" (any case) are person tracks; every other label is not.
TrackClass class_of_label(std::string_view label);
const char* to_string(TrackClass c);

struct AnnotatedTrack {
  std::string id;
  std::string label;
  std::map<int, Rect> boxes;  // at most one box per frame

  TrackClass track_class() const { return class_of_label(label); }
};

/// One annotator's tracks for one video.
struct AnnotationSet {
  std::string video;
  std::vector<AnnotatedTrack> tracks;

  // Creates the track on first use. Throws if the frame already has a box.
  void add_box(const std::string& track_id, const std::string& label, int frame,
               const Rect& box);
  std::vector<const AnnotatedTrack*> tracks_of(TrackClass c) const;
};

inline constexpr std::size_t kDefaultPermutationCap = 8;

struct PermutationResult {
  // (u track, v track) index pairs into the class-filtered track lists.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  // Frame-weighted mean overlap; empty when the mapping shares no frames.
  std::optional<double> mean;
  std::vector<double> overlaps;  // one per shared (track pair, frame)
};

/// Best injective mapping between the smaller and the larger class track set,
/// found exhaustively. Earlier mappings in lexicographic order win ties.
/// Throws std::invalid_argument("permutation space too large") when the larger
/// set exceeds `cap` tracks.
PermutationResult best_permutation(const AnnotationSet& u, const AnnotationSet& v,
                                   TrackClass c, std::size_t cap = kDefaultPermutationCap);

/// Score of one mapping, same weighting as best_permutation.
PermutationResult score_mapping(const AnnotationSet& u, const AnnotationSet& v, TrackClass c,
                                std::span<const std::pair<std::size_t, std::size_t>> pairs);

struct VideoPair {
  AnnotationSet u;
  AnnotationSet v;
};

struct VideoAgreement {
  std::string video;
  PermutationResult best;
};

struct AgreementReport {
  TrackClass track_class = TrackClass::person;
  std::vector<VideoAgreement> per_video;
  std::size_t videos = 0;    // videos contributing at least one overlap
  std::size_t overlaps = 0;  // pooled overlap count
  double mean = 0.0;
  double stddev = 0.0;       // population
};

/// Pooled mean and standard deviation of every per-frame overlap under each
/// video's best mapping. Throws InfeasibleError when nothing is shared.
AgreementReport corpus_agreement(std::span<const VideoPair> pairs, TrackClass c,
                                 std::size_t cap = kDefaultPermutationCap);

/// Pairs the videos present in both annotations, ordered by video id.
std::vector<VideoPair> pair_videos(const std::map<std::string, AnnotationSet>& u,
                                   const std::map<std::string, AnnotationSet>& v);

}  // namespace latfuse
