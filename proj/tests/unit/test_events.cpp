#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "latfuse/error.hpp"
#include "latfuse/events.hpp"
#include "oracles.hpp"
#include "random_instances.hpp"

using namespace latfuse;

namespace {

ScoredBox box_at(int frame, double cx, double cy, double w, double h, double score = 0.0) {
  ScoredBox b;
  b.frame = frame;
  b.cx = cx;
  b.cy = cy;
  b.w = w;
  b.h = h;
  b.score = score;
  return b;
}

std::vector<ScoredBox> random_track(gen::Engine& e, std::size_t T) {
  std::vector<ScoredBox> out;
  for (std::size_t t = 0; t < T; ++t) out.push_back(gen::box(e, int(t)));
  return out;
}

// Exhaustive maximization over (detection, state) sequences.
oracle::BestPath joint_exhaustive(const std::vector<FrameDetections>& frames, const HmmModel& m) {
  const std::size_t K = m.states();
  std::vector<std::size_t> sizes;
  for (const auto& f : frames) sizes.push_back(f.size() * K);
  return oracle::enumerate(sizes, [&](const std::vector<std::size_t>& path) {
    std::vector<std::size_t> dets, states;
    std::vector<ScoredBox> track;
    for (std::size_t t = 0; t < path.size(); ++t) {
      dets.push_back(path[t] / K);
      states.push_back(path[t] % K);
      track.push_back(frames[t][dets.back()]);
    }
    return oracle::track_score(frames, dets, 0, 0, false) + oracle::sequence_score(m, track, states);
  });
}

}  // namespace

TEST_CASE("emission_logprob examples") {
  const FrameSize frame{100.0, 50.0};
  const auto em = StateEmission::gaussian({0.5, 0.5, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0});
  const auto m = HmmModel::from_probabilities("m", frame, {1.0}, {{1.0}}, {em});
  // At the mean every dimension contributes -0.5 log(2 pi).
  CHECK(emission_logprob(m, 0, box_at(0, 50, 25, 1, 1)) ==
        doctest::Approx(-2.0 * std::log(2.0 * std::numbers::pi)));
  const auto u = gen::uniform_model(-3.5);
  CHECK(emission_logprob(u, 0, box_at(0, 1, 2, 3, 4)) == -3.5);

  gen::Engine e(1);
  for (int i = 0; i < 100; ++i) {
    const auto rm = gen::model(e, 3);
    const auto b = gen::box(e, 0);
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(std::abs(emission_logprob(rm, k, b) - oracle::gaussian_logpdf(rm.emissions[k], b, rm.frame)) <=
            1e-12);
  }
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(HmmModel::from_probabilities("bad", {1, 1}, {0.5, 0.4}, {{1, 0}, {0, 1}},
                                               {StateEmission::uniform(0), StateEmission::uniform(0)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(HmmModel::from_probabilities("bad", {1, 1}, {1.0}, {{0.9}}, {StateEmission::uniform(0)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(HmmModel::from_probabilities(
                      "bad", {1, 1}, {1.0}, {{1.0}},
                      {StateEmission::gaussian({0, 0, 0, 0}, {1, 0, 1, 1})}),
                  std::invalid_argument);
  // Zero-probability entries are allowed.
  CHECK_NOTHROW(HmmModel::from_probabilities("ok", {1, 1}, {1.0, 0.0}, {{0, 1}, {0, 1}},
                                             {StateEmission::uniform(0), StateEmission::uniform(0)}));
}

TEST_CASE("log_sum_exp") {
  const std::vector<double> v{1000.0, 1000.0};
  CHECK(log_sum_exp(v) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_sum_exp(std::vector<double>{}) == -std::numeric_limits<double>::infinity());
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(log_sum_exp(std::vector<double>{ninf, ninf}) == ninf);
}

TEST_CASE("forward and MAP match brute force over state sequences") {
  gen::Engine e(606);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t T = gen::between(e, 1, 6), K = gen::between(e, 1, 4);
    const auto m = gen::model(e, K);
    const auto track = random_track(e, T);
    const double fwd = forward_log_likelihood(track, m);
    CHECK(std::abs(fwd - oracle::brute_forward(m, track)) <= 1e-9);

    const auto best = oracle::enumerate(std::vector<std::size_t>(T, K), [&](const auto& s) {
      return oracle::sequence_score(m, track, s);
    });
    const StateDecoding dec = map_states(track, m);
    CHECK(std::abs(dec.score - best.value) <= 1e-9);
    if (best.ties == 0) CHECK(dec.states == best.choice);
    CHECK(fwd >= dec.score - 1e-12);
  }
}

TEST_CASE("HMM degenerate cases") {
  gen::Engine e(2);
  const auto track = random_track(e, 4);
  SUBCASE("one state") {
    const auto m = gen::model(e, 1);
    CHECK(forward_log_likelihood(track, m) == doctest::Approx(map_states(track, m).score));
  }
  SUBCASE("deterministic chain") {
    const auto u = StateEmission::uniform(-1.0);
    const auto m = HmmModel::from_probabilities("chain", {20, 20}, {1, 0, 0},
                                                {{0, 1, 0}, {0, 0, 1}, {0, 0, 1}}, {u, u, u});
    const auto d = map_states(track, m);
    CHECK(d.states == std::vector<std::size_t>{0, 1, 2, 2});
    CHECK(d.score == doctest::Approx(-4.0));
    CHECK(forward_log_likelihood(track, m) == doctest::Approx(-4.0));
  }
}

TEST_CASE("joint_track_event equals exhaustive joint maximization") {
  gen::Engine e(404);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t T = gen::between(e, 1, 4), K = gen::between(e, 1, 3);
    const auto frames = gen::frames(e, T, 3);
    const auto m = gen::model(e, K);
    const auto want = joint_exhaustive(frames, m);
    const JointResult fac = joint_track_event(frames, m, {}, JointForm::factored);
    const JointResult unf = joint_track_event(frames, m, {}, JointForm::unfactored);
    CHECK(std::abs(fac.objective - want.value) <= 1e-9);
    CHECK(fac.objective == unf.objective);
    CHECK(fac.track.indices == unf.track.indices);
    CHECK(fac.states == unf.states);
    if (want.ties == 0) {
      for (std::size_t t = 0; t < T; ++t) {
        CHECK(fac.track.indices[t] == want.choice[t] / K);
        CHECK(fac.states[t] == want.choice[t] % K);
      }
    }
    // Decomposition.
    const double sum = fac.track.f_sum() + fac.track.g_sum() + fac.h_sum + fac.a_sum + fac.init_term;
    CHECK(std::abs(sum - fac.objective) <= 1e-9);
    // Factoring saves g evaluations once K > 1.
    if (K > 1 && T > 1) CHECK(unf.g_evaluations > fac.g_evaluations);
  }
}

TEST_CASE("joint decoding dominates the pipeline") {
  gen::Engine e(405);
  for (int trial = 0; trial < 40; ++trial) {
    const auto frames = gen::frames(e, gen::between(e, 1, 5), 4);
    const auto m = gen::model(e, gen::between(e, 1, 3));
    const Track tr = viterbi_track(frames, {});
    const double pipeline = tr.objective + map_states(tr.picks, m).score;
    CHECK(joint_track_event(frames, m, {}).objective >= pipeline - 1e-9);
  }
}

TEST_CASE("one-state joint decoding is plain tracking") {
  gen::Engine e(406);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t T = gen::between(e, 1, 6);
    const auto frames = gen::frames(e, T, 5);
    const double c = gen::uniform(e, -3, 0);
    const auto m = gen::uniform_model(c);
    const JointResult j = joint_track_event(frames, m, {});
    const Track tr = viterbi_track(frames, {});
    CHECK(j.track.indices == tr.indices);
    CHECK(j.objective == doctest::Approx(tr.objective + double(T) * c).epsilon(1e-12));
  }
}

TEST_CASE("joint decoding rejects empty frames") {
  std::vector<FrameDetections> f{FrameDetections(0, {box_at(0, 1, 1, 2, 2)}), FrameDetections(1)};
  CHECK_THROWS_AS(joint_track_event(f, gen::uniform_model(0), {}), InfeasibleError);
}

TEST_CASE("g table is shared across models") {
  gen::Engine e(407);
  const auto frames = gen::frames(e, 5, 4);
  std::vector<HmmModel> one{gen::model(e, 2, {20, 20}, "a")};
  std::vector<HmmModel> five = one;
  for (int i = 0; i < 4; ++i) five.push_back(gen::model(e, 3, {20, 20}, "m" + std::to_string(i)));
  const auto r1 = joint_multi_model(frames, one, {});
  const auto r5 = joint_multi_model(frames, five, {});
  CHECK(r1.g_evaluations == r5.g_evaluations);
  std::size_t pairs = 0;
  for (std::size_t t = 1; t < frames.size(); ++t) pairs += frames[t - 1].size() * frames[t].size();
  CHECK(r5.g_evaluations == pairs);
  for (std::size_t i = 1; i < r5.results.size(); ++i)
    CHECK(r5.results[i - 1].objective >= r5.results[i].objective);
  for (const auto& r : r5.results) {
    const auto& m = *std::find_if(five.begin(), five.end(), [&](auto& x) { return x.name == r.event; });
    CHECK(joint_track_event(frames, m, {}).objective == r.objective);
  }
}

TEST_CASE("classification separates running from standing") {
  const FrameSize frame{200, 100};
  const auto run = HmmModel::from_probabilities(
      "run", frame, {1.0, 0.0}, {{0.5, 0.5}, {0.0, 1.0}},
      {StateEmission::gaussian({0.2, 0.5, std::log(10.0), std::log(20.0)}, {0.02, 0.01, 0.1, 0.1}),
       StateEmission::gaussian({0.7, 0.5, std::log(10.0), std::log(20.0)}, {0.05, 0.01, 0.1, 0.1})});
  const auto stand = HmmModel::from_probabilities(
      "stand", frame, {1.0}, {{1.0}},
      {StateEmission::gaussian({0.2, 0.5, std::log(10.0), std::log(20.0)}, {0.01, 0.01, 0.1, 0.1})});
  const std::vector<HmmModel> models{stand, run};

  std::vector<ScoredBox> moving, still;
  for (int t = 0; t < 8; ++t) {
    moving.push_back(box_at(t, 40 + 14.0 * t, 50, 10, 20));
    still.push_back(box_at(t, 40, 50, 10, 20));
  }
  for (auto mode : {ClassifyMode::ml, ClassifyMode::map}) {
    CHECK(classify(moving, models, mode)[0].label == "run");
    CHECK(classify(still, models, mode)[0].label == "stand");
  }
  CHECK_THROWS_AS(classify(moving, models, ClassifyMode::joint), std::invalid_argument);
  CHECK_THROWS_AS(classify(moving, std::vector<HmmModel>{}, ClassifyMode::ml), std::invalid_argument);

  std::vector<FrameDetections> frames;
  for (int t = 0; t < 8; ++t) frames.emplace_back(t, std::vector<ScoredBox>{moving[std::size_t(t)]});
  CHECK(classify(frames, models, CoherencyParams{MotionModel::constant_velocity(14, 0)})[0].label ==
        "run");
}

TEST_CASE("fill_event_terms recomputes the decomposition") {
  gen::Engine e(408);
  const auto frames = gen::frames(e, 4, 3);
  const auto m = gen::model(e, 3);
  JointResult r = joint_track_event(frames, m, {});
  const double h = r.h_sum, a = r.a_sum, init = r.init_term;
  r.h_sum = r.a_sum = r.init_term = 0;
  fill_event_terms(r, m);
  CHECK(r.h_sum == doctest::Approx(h));
  CHECK(r.a_sum == doctest::Approx(a));
  CHECK(r.init_term == init);
}
