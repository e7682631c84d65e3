#include "latfuse/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "latfuse/error.hpp"

namespace latfuse {

Rect to_rect(const ScoredBox& b) {
  return {b.cx - b.w / 2, b.cy - b.h / 2, b.cx + b.w / 2, b.cy + b.h / 2};
}

double overlap(const Rect& a, const Rect& b) {
  if (!(a.x2 > a.x1) || !(a.y2 > a.y1) || !(b.x2 > b.x1) || !(b.y2 > b.y1))
    throw std::invalid_argument("overlap: box has zero area");
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

TrackClass class_of_label(std::string_view label) {
  std::string lower(label);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return lower == "person" || lower == "human" ? TrackClass::person : TrackClass::nonperson;
}

const char* to_string(TrackClass c) {
  return c == TrackClass::person ? "person" : "nonperson";
}

void AnnotationSet::add_box(const std::string& track_id, const std::string& label, int frame,
                            const Rect& box) {
  auto it = std::find_if(tracks.begin(), tracks.end(),
                         [&](const AnnotatedTrack& t) { return t.id == track_id; });
  if (it == tracks.end()) {
    tracks.push_back({track_id, label, {}});
    it = std::prev(tracks.end());
  } else if (it->label != label) {
    throw std::invalid_argument("track " + track_id + " changes label");
  }
  if (!it->boxes.emplace(frame, box).second)
    throw std::invalid_argument("track " + track_id + " has two boxes in frame " +
                                std::to_string(frame));
}

std::vector<const AnnotatedTrack*> AnnotationSet::tracks_of(TrackClass c) const {
  std::vector<const AnnotatedTrack*> out;
  for (const auto& t : tracks)
    if (t.track_class() == c) out.push_back(&t);
  return out;
}

namespace {

// Overlap sum and shared-frame count for one pair of tracks.
struct PairStats {
  double sum = 0.0;
  std::size_t frames = 0;
};

PairStats pair_stats(const AnnotatedTrack& a, const AnnotatedTrack& b,
                     std::vector<double>* overlaps = nullptr) {
  PairStats st;
  for (const auto& [frame, ra] : a.boxes) {
    const auto it = b.boxes.find(frame);
    if (it == b.boxes.end()) continue;
    const double o = overlap(ra, it->second);
    st.sum += o;
    ++st.frames;
    if (overlaps) overlaps->push_back(o);
  }
  return st;
}

}  // namespace

PermutationResult score_mapping(const AnnotationSet& u, const AnnotationSet& v, TrackClass c,
                                std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  const auto ut = u.tracks_of(c);
  const auto vt = v.tracks_of(c);
  PermutationResult r;
  r.pairs.assign(pairs.begin(), pairs.end());
  double sum = 0.0;
  for (const auto& [i, j] : pairs) {
    if (i >= ut.size() || j >= vt.size()) throw std::invalid_argument("mapping index out of range");
    pair_stats(*ut[i], *vt[j], &r.overlaps);
  }
  for (double o : r.overlaps) sum += o;
  if (!r.overlaps.empty()) r.mean = sum / static_cast<double>(r.overlaps.size());
  return r;
}

PermutationResult best_permutation(const AnnotationSet& u, const AnnotationSet& v,
                                   TrackClass c, std::size_t cap) {
  const auto ut = u.tracks_of(c);
  const auto vt = v.tracks_of(c);
  const bool u_smaller = ut.size() <= vt.size();
  const std::size_t m = std::min(ut.size(), vt.size());
  const std::size_t M = std::max(ut.size(), vt.size());
  if (M > cap) throw std::invalid_argument("permutation space too large");

  // stats[i][j]: i indexes the smaller side, j the larger.
  std::vector<std::vector<PairStats>> stats(m, std::vector<PairStats>(M));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < M; ++j)
      stats[i][j] = u_smaller ? pair_stats(*ut[i], *vt[j]) : pair_stats(*ut[j], *vt[i]);

  std::vector<std::size_t> current(m), best(m);
  for (std::size_t i = 0; i < m; ++i) best[i] = i;
  std::vector<bool> used(M, false);
  bool have_best = false;
  double best_mean = 0.0;

  auto search = [&](auto&& self, std::size_t i, double sum, std::size_t frames) -> void {
    if (i == m) {
      if (frames == 0) return;
      const double mean = sum / static_cast<double>(frames);
      if (!have_best || mean > best_mean) {
        have_best = true;
        best_mean = mean;
        best = current;
      }
      return;
    }
    for (std::size_t j = 0; j < M; ++j) {
      if (used[j]) continue;
      used[j] = true;
      current[i] = j;
      self(self, i + 1, sum + stats[i][j].sum, frames + stats[i][j].frames);
      used[j] = false;
    }
  };
  search(search, 0, 0.0, 0);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i)
    pairs.emplace_back(u_smaller ? i : best[i], u_smaller ? best[i] : i);
  std::sort(pairs.begin(), pairs.end());
  return score_mapping(u, v, c, pairs);
}

AgreementReport corpus_agreement(std::span<const VideoPair> pairs, TrackClass c,
                                 std::size_t cap) {
  AgreementReport rep;
  rep.track_class = c;
  std::vector<double> pooled;
  for (const auto& p : pairs) {
    VideoAgreement va{p.u.video, best_permutation(p.u, p.v, c, cap)};
    if (!va.best.overlaps.empty()) ++rep.videos;
    pooled.insert(pooled.end(), va.best.overlaps.begin(), va.best.overlaps.end());
    rep.per_video.push_back(std::move(va));
  }
  if (pooled.empty())
    throw InfeasibleError(std::string("no shared ") + to_string(c) + " frames to compare");
  rep.overlaps = pooled.size();
  double sum = 0.0;
  for (double o : pooled) sum += o;
  rep.mean = sum / static_cast<double>(pooled.size());
  double ss = 0.0;
  for (double o : pooled) ss += (o - rep.mean) * (o - rep.mean);
  rep.stddev = std::sqrt(ss / static_cast<double>(pooled.size()));
  return rep;
}

std::vector<VideoPair> pair_videos(const std::map<std::string, AnnotationSet>& u,
                                   const std::map<std::string, AnnotationSet>& v) {
  std::vector<VideoPair> out;
  for (const auto& [video, set] : u) {
    const auto it = v.find(video);
    if (it != v.end()) out.push_back({set, it->second});
  }
  return out;
}

}  // namespace latfuse
