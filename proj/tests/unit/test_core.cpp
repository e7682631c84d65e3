#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "latfuse/core.hpp"
#include "random_instances.hpp"

using namespace latfuse;

namespace {

ScoredBox at(double cx, double cy, double score = 0.0, int frame = 0) {
  ScoredBox b;
  b.frame = frame;
  b.cx = cx;
  b.cy = cy;
  b.w = 4.0;
  b.h = 8.0;
  b.score = score;
  return b;
}

// Exhaustive Otsu: every interior bin boundary, class split by value.
double otsu_oracle(const std::vector<double>& s) {
  const double lo = *std::min_element(s.begin(), s.end());
  const double hi = *std::max_element(s.begin(), s.end());
  if (lo == hi) return lo;
  const double width = (hi - lo) / kOtsuBins;
  double best_var = -1.0, best = lo;
  for (int i = 1; i < kOtsuBins; ++i) {
    const double thr = lo + i * width;
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (double v : s) {
      if (v < thr) { n0 += 1; s0 += v; } else { n1 += 1; s1 += v; }
    }
    double var = 0.0;
    if (n0 > 0 && n1 > 0) {
      const double n = n0 + n1, m0 = s0 / n0, m1 = s1 / n1;
      var = (n0 / n) * (n1 / n) * (m0 - m1) * (m0 - m1);
    }
    if (var > best_var) { best_var = var; best = thr; }
  }
  return best;
}

}  // namespace

TEST_CASE("validate rejects degenerate boxes") {
  ScoredBox b = at(1, 1);
  CHECK_NOTHROW(validate(b));
  b.w = 0.0;
  CHECK_THROWS_AS(validate(b), std::invalid_argument);
  b = at(1, 1, std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(validate(b), std::invalid_argument);
  CHECK_THROWS_AS(FrameDetections(3, {at(0, 0, 0, 2)}), std::invalid_argument);
}

TEST_CASE("forward_project") {
  const ScoredBox b = at(10, 10, 1.5);
  const ScoredBox id = forward_project(b, MotionModel::identity());
  CHECK(id.frame == 1);
  CHECK(id.cx == 10.0);
  CHECK(id.cy == 10.0);
  CHECK(id.score == 1.5);

  const auto cv = MotionModel::constant_velocity(2, -1);
  const ScoredBox once = forward_project(b, cv);
  CHECK(once.cx == 12.0);
  CHECK(once.cy == 9.0);
  const ScoredBox twice = forward_project(once, cv);
  CHECK(twice.cx == 14.0);
  CHECK(twice.cy == 8.0);
  CHECK(twice.frame == 2);
  CHECK(twice.w == b.w);

  CHECK_THROWS(MotionModel::constant_velocity(std::nan(""), 0));
}

TEST_CASE("forward_project identity keeps geometry under repetition") {
  gen::Engine e(3);
  for (int i = 0; i < 50; ++i) {
    const ScoredBox b = gen::box(e, 0);
    const ScoredBox p = forward_project(forward_project(b, {}), {});
    CHECK(p.cx == b.cx);
    CHECK(p.cy == b.cy);
    CHECK(p.w == b.w);
    CHECK(p.frame == 2);
  }
}

TEST_CASE("otsu_offset examples") {
  const std::vector<double> two_clusters{0, 0, 0, 10, 10, 10};
  const double big = 1e300;
  const double thr = otsu_offset(two_clusters, big, 0.0);
  CHECK(thr > 0.0);
  CHECK(thr <= 10.0);
  // Every cut separates the clusters equally; the lowest wins.
  CHECK(thr == doctest::Approx(10.0 / kOtsuBins));

  const std::vector<double> flat{5, 5, 5};
  CHECK(otsu_offset(flat, 4.0, 0.5) == 4.5);
  CHECK(otsu_threshold(flat) == 5.0);

  const std::vector<double> pair{1, 2};
  CHECK(otsu_offset(pair, 0.0, 0.0) == 0.0);

  CHECK_THROWS_WITH_AS(otsu_offset(std::vector<double>{}, 0.0, 1.0), "no scores to normalize",
                       std::invalid_argument);
}

TEST_CASE("otsu threshold matches exhaustive cut search") {
  gen::Engine e(11);
  std::normal_distribution<double> lowd(-1.0, 0.5), highd(2.0, 0.7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s;
    const auto n_lo = gen::between(e, 1, 30), n_hi = gen::between(e, 1, 30);
    for (std::size_t i = 0; i < n_lo; ++i) s.push_back(lowd(e));
    for (std::size_t i = 0; i < n_hi; ++i) s.push_back(highd(e));
    CHECK(otsu_threshold(s) == doctest::Approx(otsu_oracle(s)).epsilon(1e-12));
    // Never above the trained side.
    const double trained = gen::uniform(e, -2, 3), eps = gen::uniform(e, 0, 1);
    CHECK(otsu_offset(s, trained, eps) <= trained + eps);
  }
}

TEST_CASE("top_scores takes the best box of each non-empty frame") {
  std::vector<FrameDetections> frames{FrameDetections(0, {at(0, 0, 1), at(0, 0, 3)}),
                                      FrameDetections(1), FrameDetections(2, {at(0, 0, -1, 2)})};
  const auto s = top_scores(frames);
  REQUIRE(s.size() == 2);
  CHECK(s[0] == 3.0);
  CHECK(s[1] == -1.0);
}

TEST_CASE("pool_detections") {
  FrameDetections a(4, {at(1, 1, 5, 4)});
  SUBCASE("one source, zero offset is the identity") {
    const std::vector<SourceDetections> src{{a, 0.0}};
    CHECK(pool_detections(4, src) == a);
  }
  SUBCASE("offsets are subtracted per source") {
    ScoredBox b = at(2, 2, 5, 4);
    b.source_id = 1;
    const std::vector<SourceDetections> src{{a, 1.0}, {FrameDetections(4, {b}), 2.0}};
    const auto pooled = pool_detections(4, src);
    REQUIRE(pooled.size() == 2);
    CHECK(pooled[0].score == 4.0);
    CHECK(pooled[1].score == 3.0);
    CHECK(pooled[1].source_id == 1);
  }
  SUBCASE("no sources gives an empty frame") {
    const auto pooled = pool_detections(7, std::span<const SourceDetections>{});
    CHECK(pooled.empty());
    CHECK(pooled.frame() == 7);
  }
  SUBCASE("mismatched frames are rejected") {
    const std::vector<SourceDetections> src{{a, 0.0}, {FrameDetections(5), 0.0}};
    CHECK_THROWS_AS(pool_detections(4, src), std::invalid_argument);
  }
}

TEST_CASE("pool_detections size is the sum of inputs") {
  gen::Engine e(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SourceDetections> src;
    std::size_t total = 0;
    const auto n = gen::between(e, 0, 4);
    for (std::size_t i = 0; i < n; ++i) {
      FrameDetections f(0);
      const auto J = gen::between(e, 0, 5);
      for (std::size_t j = 0; j < J; ++j) f.add(gen::box(e, 0));
      total += J;
      src.push_back({f, gen::uniform(e, -1, 1)});
    }
    CHECK(pool_detections(0, src).size() == total);
  }
}

TEST_CASE("top_k") {
  FrameDetections f(0, {at(0, 0, 3), at(1, 0, 1), at(2, 0, 4)});
  const auto two = top_k(f, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].score == 4.0);
  CHECK(two[1].score == 3.0);

  const auto all = top_k(f, 5);
  CHECK(all.size() == 3);
  CHECK(all[2].score == 1.0);

  FrameDetections ties(0, {at(0, 0, 2), at(1, 0, 2), at(2, 0, 2)});
  const auto first_two = top_k(ties, 2);
  CHECK(first_two[0].cx == 0.0);
  CHECK(first_two[1].cx == 1.0);

  CHECK_THROWS_AS(top_k(f, 0), std::invalid_argument);
}

TEST_CASE("top_k output is non-increasing and drawn from the input") {
  gen::Engine e(9);
  for (int trial = 0; trial < 50; ++trial) {
    FrameDetections f(0);
    const auto J = gen::between(e, 0, 12);
    for (std::size_t j = 0; j < J; ++j) f.add(gen::box(e, 0));
    const auto k = gen::between(e, 1, 15);
    const auto top = top_k(f, k);
    CHECK(top.size() == std::min(k, J));
    for (std::size_t i = 1; i < top.size(); ++i) CHECK(top[i - 1].score >= top[i].score);
    for (const auto& b : top.boxes())
      CHECK(std::find(f.boxes().begin(), f.boxes().end(), b) != f.boxes().end());
  }
}
