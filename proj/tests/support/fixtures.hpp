#pragma once

// Hand-built annotation fixture: 3 videos, 2 annotators.
//
// Person overlaps under the best mapping:
//   a: frame 0 -> 1, frame 1 -> 1/3
//   b: the second u track matches, frame 0 -> 1/2
//   c: one shared frame -> 1/2
// Pooled mean 7/12, population sd 1/4.

#include <map>
#include <string>

#include "latfuse/eval.hpp"

namespace fixture {

inline constexpr double kPooledMean = 7.0 / 12.0;
inline constexpr double kPooledStddev = 0.25;

struct TwoAnnotators {
  std::map<std::string, latfuse::AnnotationSet> u, v;
};

inline TwoAnnotators three_videos() {
  using latfuse::Rect;
  TwoAnnotators f;
  auto& ua = f.u["a"];
  auto& va = f.v["a"];
  ua.video = va.video = "a";
  ua.add_box("p1", "person", 0, Rect{0, 0, 2, 2});
  ua.add_box("p1", "person", 1, Rect{0, 0, 2, 2});
  va.add_box("q1", "Person", 0, Rect{0, 0, 2, 2});
  va.add_box("q1", "Person", 1, Rect{1, 0, 3, 2});

  auto& ub = f.u["b"];
  auto& vb = f.v["b"];
  ub.video = vb.video = "b";
  ub.add_box("a", "person", 0, Rect{0, 0, 4, 4});
  ub.add_box("b", "human", 0, Rect{10, 10, 12, 12});
  ub.add_box("car", "car", 0, Rect{0, 0, 4, 4});
  vb.add_box("c", "person", 0, Rect{10, 10, 12, 14});
  vb.add_box("car", "car", 0, Rect{2, 0, 6, 4});

  auto& uc = f.u["c"];
  auto& vc = f.v["c"];
  uc.video = vc.video = "c";
  uc.add_box("d", "person", 0, Rect{0, 0, 2, 2});
  uc.add_box("d", "person", 1, Rect{0, 0, 2, 2});
  vc.add_box("e", "person", 1, Rect{0, 0, 2, 1});
  vc.add_box("e", "person", 2, Rect{0, 0, 2, 1});
  return f;
}

}  // namespace fixture
