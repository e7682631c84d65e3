#pragma once

// Brute-force reference computations for the test suites. Nothing here calls
// into the optimizers under test; scores are recomputed from first principles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "latfuse/core.hpp"
#include "latfuse/events.hpp"
#include "latfuse/gdt.hpp"
#include "latfuse/pyramid.hpp"

namespace oracle {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// max_p values[p] - w (p - q)^2 by all pairs.
inline std::vector<double> gdt_1d(const std::vector<double>& values, double w) {
  const std::size_t n = values.size();
  std::vector<double> out(n, kNegInf);
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t p = 0; p < n; ++p) {
      const double d = static_cast<double>(p) - static_cast<double>(q);
      out[q] = std::max(out[q], values[p] - w * d * d);
    }
  return out;
}

inline std::vector<double> gdt_3d(const latfuse::Grid3D& g) {
  std::vector<double> out(g.size(), kNegInf);
  for (std::size_t q = 0; q < g.size(); ++q) {
    const std::size_t qx = q / (g.Y * g.S), qy = (q / g.S) % g.Y, qs = q % g.S;
    for (std::size_t p = 0; p < g.size(); ++p) {
      const double dx = double(p / (g.Y * g.S)) - double(qx);
      const double dy = double((p / g.S) % g.Y) - double(qy);
      const double ds = double(p % g.S) - double(qs);
      out[q] = std::max(out[q], g.values[p] - g.wx * dx * dx - g.wy * dy * dy - g.ws * ds * ds);
    }
  }
  return out;
}

// g written out directly: minus the (squared) distance from the projected
// previous center to the next center.
inline double g_direct(const latfuse::ScoredBox& a, const latfuse::ScoredBox& b, double vx,
                       double vy, bool squared) {
  const double dx = a.cx + vx - b.cx;
  const double dy = a.cy + vy - b.cy;
  const double sq = dx * dx + dy * dy;
  return squared ? -sq : -std::sqrt(sq);
}

struct BestPath {
  double value = kNegInf;
  std::vector<std::size_t> choice;
  std::size_t ties = 0;  // paths within 1e-9 of the best, excluding it
};

// Enumerates every element of the product space sizes[0] x ... x sizes[T-1]
// and maximizes score(path).
inline BestPath enumerate(const std::vector<std::size_t>& sizes,
                          const std::function<double(const std::vector<std::size_t>&)>& score) {
  BestPath best;
  std::vector<std::size_t> path(sizes.size(), 0);
  std::vector<double> all;
  for (;;) {
    const double v = score(path);
    if (v > best.value) {
      best.value = v;
      best.choice = path;
    }
    all.push_back(v);
    std::size_t t = 0;
    while (t < sizes.size() && ++path[t] == sizes[t]) path[t++] = 0;
    if (t == sizes.size()) break;
  }
  for (double v : all)
    if (std::abs(v - best.value) <= 1e-9) ++best.ties;
  best.ties -= 1;
  return best;
}

inline double track_score(std::span<const latfuse::FrameDetections> frames,
                          const std::vector<std::size_t>& path, double vx, double vy,
                          bool squared) {
  double s = 0.0;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    s += frames[t][path[t]].score;
    if (t > 0) s += g_direct(frames[t - 1][path[t - 1]], frames[t][path[t]], vx, vy, squared);
  }
  return s;
}

inline double gaussian_logpdf(const latfuse::StateEmission& e, const latfuse::ScoredBox& b,
                              const latfuse::FrameSize& frame) {
  if (e.kind == latfuse::StateEmission::Kind::uniform) return e.log_density;
  const double x[4] = {b.cx / frame.width, b.cy / frame.height, std::log(b.w), std::log(b.h)};
  double lp = 0.0;
  for (int d = 0; d < 4; ++d) {
    const double z = x[d] - e.mean[d];
    lp += -0.5 * std::log(2.0 * std::numbers::pi * e.variance[d]) - z * z / (2.0 * e.variance[d]);
  }
  return lp;
}

// init + sum h + sum a for one state sequence.
inline double sequence_score(const latfuse::HmmModel& m, std::span<const latfuse::ScoredBox> track,
                             const std::vector<std::size_t>& states) {
  const std::size_t K = m.states();
  double s = m.log_init[states[0]];
  for (std::size_t t = 0; t < track.size(); ++t) {
    s += gaussian_logpdf(m.emissions[states[t]], track[t], m.frame);
    if (t > 0) s += m.log_trans[states[t - 1] * K + states[t]];
  }
  return s;
}

inline double brute_forward(const latfuse::HmmModel& m, std::span<const latfuse::ScoredBox> track) {
  std::vector<double> scores;
  enumerate(std::vector<std::size_t>(track.size(), m.states()),
            [&](const std::vector<std::size_t>& s) {
              scores.push_back(sequence_score(m, track, s));
              return 0.0;
            });
  const double mx = *std::max_element(scores.begin(), scores.end());
  double acc = 0.0;
  for (double v : scores) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

// Prism distance written out from the formula.
inline double prism_d(const latfuse::DetectionPrism& pa, std::size_t a,
                      const latfuse::DetectionPrism& pb, std::size_t b, double alpha) {
  const auto& g = pa.grid;
  const double ax = double(a / (g.Y * g.S)), ay = double((a / g.S) % g.Y), as = double(a % g.S);
  const double bx = double(b / (g.Y * g.S)), by = double((b / g.S) % g.Y), bs = double(b % g.S);
  const double ppa = pa.scale_map.factors[static_cast<std::size_t>(as)];
  const double ppb = pb.scale_map.factors[static_cast<std::size_t>(bs)];
  const double dx = ppa * ax - ppb * bx, dy = ppa * ay - ppb * by, ds = as - bs;
  return dx * dx + dy * dy + alpha * ds * ds;
}

// All-cells quadratic Viterbi over prisms: O(T * N^2).
inline BestPath prism_viterbi(std::span<const latfuse::DetectionPrism> prisms, double alpha) {
  const std::size_t T = prisms.size(), N = prisms[0].grid.size();
  std::vector<std::vector<double>> delta(T, std::vector<double>(N));
  std::vector<std::vector<std::size_t>> back(T, std::vector<std::size_t>(N));
  delta[0] = prisms[0].grid.values;
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t c = 0; c < N; ++c) {
      double best = kNegInf;
      for (std::size_t p = 0; p < N; ++p) {
        const double v = delta[t - 1][p] - prism_d(prisms[t - 1], p, prisms[t], c, alpha);
        if (v > best) {
          best = v;
          back[t][c] = p;
        }
      }
      delta[t][c] = prisms[t].grid.values[c] + best;
    }
  BestPath out;
  out.choice.resize(T);
  std::size_t c = static_cast<std::size_t>(
      std::max_element(delta[T - 1].begin(), delta[T - 1].end()) - delta[T - 1].begin());
  out.value = delta[T - 1][c];
  for (std::size_t t = T; t-- > 0;) {
    out.choice[t] = c;
    if (t > 0) c = back[t][c];
  }
  return out;
}

// Depth-first maximization over (cell, state) sequences with running sums;
// visits all (N*K)^T paths.
inline BestPath unified_exhaustive(std::span<const latfuse::DetectionPrism> prisms,
                                   const latfuse::HmmModel& m, double alpha) {
  const std::size_t T = prisms.size(), N = prisms[0].grid.size(), K = m.states();
  std::vector<double> h(N * K);
  for (std::size_t c = 0; c < N; ++c)
    for (std::size_t k = 0; k < K; ++k)
      h[c * K + k] = gaussian_logpdf(m.emissions[k], prisms[0].realize(c), m.frame);

  BestPath best;
  std::vector<std::size_t> path(T);
  std::function<void(std::size_t, double)> rec = [&](std::size_t t, double acc) {
    if (t == T) {
      if (acc > best.value) {
        best.value = acc;
        best.choice = path;
      }
      return;
    }
    for (std::size_t node = 0; node < N * K; ++node) {
      const std::size_t c = node / K, k = node % K;
      double v = acc + prisms[t].grid.values[c] + h[node];
      if (t == 0) {
        v += m.log_init[k];
      } else {
        const std::size_t pc = path[t - 1] / K, pk = path[t - 1] % K;
        v += -prism_d(prisms[t - 1], pc, prisms[t], c, alpha) + m.log_trans[pk * K + k];
      }
      path[t] = node;
      rec(t + 1, v);
    }
  };
  rec(0, 0.0);
  return best;
}

}  // namespace oracle
