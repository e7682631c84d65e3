#include "latfuse/events.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "latfuse/error.hpp"

namespace latfuse {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_log_prob(double v) { return !std::isnan(v) && v != std::numeric_limits<double>::infinity(); }

void check_distribution(std::span<const double> logp, const std::string& what) {
  double total = 0.0;
  for (double v : logp) {
    if (!is_log_prob(v)) throw std::invalid_argument(what + " holds an invalid log probability");
    total += std::exp(v);
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw std::invalid_argument(what + " does not sum to 1 (got " + std::to_string(total) + ")");
}

void check_frames(std::span<const FrameDetections> frames) {
  if (frames.empty()) throw std::invalid_argument("no frames to decode");
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].empty())
      throw InfeasibleError("frame " + std::to_string(frames[t].frame()) +
                            " has no detections");
    if (frames[t].frame() != frames[0].frame() + static_cast<int>(t))
      throw std::invalid_argument("frame indices must be contiguous");
  }
}

// h(k, b) for every candidate of a frame: row j, column k.
std::vector<double> emission_table(const FrameDetections& frame, const HmmModel& model) {
  const std::size_t K = model.states();
  std::vector<double> h(frame.size() * K);
  for (std::size_t j = 0; j < frame.size(); ++j)
    for (std::size_t k = 0; k < K; ++k) h[j * K + k] = emission_logprob(model, k, frame[j]);
  return h;
}

// Shared lattice sweep for both joint forms. `g` is called as g(t, j', j).
template <class G>
JointResult joint_decode(std::span<const FrameDetections> frames, const HmmModel& model,
                         const CoherencyParams& params, JointForm form, G&& g) {
  const std::size_t T = frames.size();
  const std::size_t K = model.states();

  // delta[t][j*K + k]; back holds the flattened (j'*K + k') predecessor.
  std::vector<std::vector<double>> delta(T);
  std::vector<std::vector<std::size_t>> back(T);

  {
    const auto h = emission_table(frames[0], model);
    delta[0].resize(frames[0].size() * K);
    for (std::size_t j = 0; j < frames[0].size(); ++j)
      for (std::size_t k = 0; k < K; ++k)
        delta[0][j * K + k] = frames[0][j].score + h[j * K + k] + model.log_init[k];
  }

  std::vector<double> best_prev;
  std::vector<std::size_t> best_prev_state;
  for (std::size_t t = 1; t < T; ++t) {
    const std::size_t Jp = frames[t - 1].size();
    const std::size_t J = frames[t].size();
    const auto h = emission_table(frames[t], model);
    const auto& dp = delta[t - 1];
    delta[t].resize(J * K);
    back[t].resize(J * K);

    if (form == JointForm::factored) {
      // max over k' of a(k', k) + delta(j', k'), independent of j.
      best_prev.assign(Jp * K, 0.0);
      best_prev_state.assign(Jp * K, 0);
      for (std::size_t jp = 0; jp < Jp; ++jp)
        for (std::size_t k = 0; k < K; ++k) {
          double best = 0.0;
          std::size_t arg = 0;
          for (std::size_t kp = 0; kp < K; ++kp) {
            const double v = model.trans(kp, k) + dp[jp * K + kp];
            if (kp == 0 || v > best) {
              best = v;
              arg = kp;
            }
          }
          best_prev[jp * K + k] = best;
          best_prev_state[jp * K + k] = arg;
        }

      std::vector<double> gj(Jp);
      for (std::size_t j = 0; j < J; ++j) {
        for (std::size_t jp = 0; jp < Jp; ++jp) gj[jp] = g(t, jp, j);
        for (std::size_t k = 0; k < K; ++k) {
          double best = 0.0;
          std::size_t arg = 0;
          for (std::size_t jp = 0; jp < Jp; ++jp) {
            const double v = gj[jp] + best_prev[jp * K + k];
            if (jp == 0 || v > best) {
              best = v;
              arg = jp * K + best_prev_state[jp * K + k];
            }
          }
          delta[t][j * K + k] = frames[t][j].score + h[j * K + k] + best;
          back[t][j * K + k] = arg;
        }
      }
    } else {
      for (std::size_t j = 0; j < J; ++j)
        for (std::size_t k = 0; k < K; ++k) {
          double best = 0.0;
          std::size_t arg = 0;
          bool first = true;
          for (std::size_t jp = 0; jp < Jp; ++jp)
            for (std::size_t kp = 0; kp < K; ++kp) {
              const double v = g(t, jp, j) + (model.trans(kp, k) + dp[jp * K + kp]);
              if (first || v > best) {
                best = v;
                arg = jp * K + kp;
                first = false;
              }
            }
          delta[t][j * K + k] = frames[t][j].score + h[j * K + k] + best;
          back[t][j * K + k] = arg;
        }
    }
  }

  const auto& last = delta[T - 1];
  std::size_t node = 0;
  for (std::size_t i = 1; i < last.size(); ++i)
    if (last[i] > last[node]) node = i;

  std::vector<std::size_t> idx(T), states(T);
  for (std::size_t t = T; t-- > 0;) {
    idx[t] = node / K;
    states[t] = node % K;
    if (t > 0) node = back[t][node];
  }

  JointResult r;
  r.track = make_track(frames, idx, params);
  r.states = std::move(states);
  r.event = model.name;
  fill_event_terms(r, model);
  return r;
}

}  // namespace

Features box_features(const ScoredBox& box, const FrameSize& frame) {
  return {box.cx / frame.width, box.cy / frame.height, std::log(box.w), std::log(box.h)};
}

StateEmission StateEmission::gaussian(const Features& mean, const Features& variance) {
  StateEmission e;
  e.kind = Kind::gaussian;
  e.mean = mean;
  e.variance = variance;
  return e;
}

StateEmission StateEmission::uniform(double log_density) {
  StateEmission e;
  e.kind = Kind::uniform;
  e.log_density = log_density;
  return e;
}

void HmmModel::validate() const {
  const std::size_t K = states();
  if (K == 0) throw std::invalid_argument("model '" + name + "' has no states");
  if (log_trans.size() != K * K)
    throw std::invalid_argument("model '" + name + "' transition matrix is not K x K");
  if (emissions.size() != K)
    throw std::invalid_argument("model '" + name + "' needs one emission per state");
  if (!(frame.width > 0.0) || !(frame.height > 0.0))
    throw std::invalid_argument("model '" + name + "' frame size must be positive");
  check_distribution(log_init, "model '" + name + "' initial distribution");
  for (std::size_t k = 0; k < K; ++k)
    check_distribution(std::span(log_trans).subspan(k * K, K),
                       "model '" + name + "' transition row " + std::to_string(k));
  for (const auto& e : emissions) {
    if (e.kind == StateEmission::Kind::uniform) {
      if (!is_log_prob(e.log_density))
        throw std::invalid_argument("model '" + name + "' has an invalid uniform density");
      continue;
    }
    for (std::size_t d = 0; d < kFeatureDim; ++d) {
      if (!std::isfinite(e.mean[d]))
        throw std::invalid_argument("model '" + name + "' has a non-finite emission mean");
      if (!(e.variance[d] > 0.0) || !std::isfinite(e.variance[d]))
        throw std::invalid_argument("model '" + name + "' emission variances must be positive");
    }
  }
}

HmmModel HmmModel::from_probabilities(std::string name, FrameSize frame,
                                      const std::vector<double>& init,
                                      const std::vector<std::vector<double>>& trans,
                                      std::vector<StateEmission> emissions) {
  HmmModel m;
  m.name = std::move(name);
  m.frame = frame;
  for (double p : init) m.log_init.push_back(std::log(p));
  for (const auto& row : trans) {
    if (row.size() != init.size())
      throw std::invalid_argument("transition row length does not match the state count");
    for (double p : row) m.log_trans.push_back(std::log(p));
  }
  m.emissions = std::move(emissions);
  m.validate();
  return m;
}

double emission_logprob(const HmmModel& model, std::size_t k, const ScoredBox& box) {
  if (k >= model.states()) throw std::out_of_range("emission_logprob: state out of range");
  const StateEmission& e = model.emissions[k];
  if (e.kind == StateEmission::Kind::uniform) return e.log_density;
  const Features x = box_features(box, model.frame);
  double lp = 0.0;
  for (std::size_t d = 0; d < kFeatureDim; ++d) {
    const double diff = x[d] - e.mean[d];
    lp -= 0.5 * std::log(2.0 * std::numbers::pi * e.variance[d]);
    lp -= 0.5 * diff * diff / e.variance[d];
  }
  return lp;
}

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double forward_log_likelihood(std::span<const ScoredBox> track, const HmmModel& model) {
  if (track.empty()) throw std::invalid_argument("forward_log_likelihood: empty track");
  const std::size_t K = model.states();
  std::vector<double> alpha(K), next(K), terms(K);
  for (std::size_t k = 0; k < K; ++k)
    alpha[k] = model.log_init[k] + emission_logprob(model, k, track[0]);
  for (std::size_t t = 1; t < track.size(); ++t) {
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t kp = 0; kp < K; ++kp) terms[kp] = alpha[kp] + model.trans(kp, k);
      next[k] = emission_logprob(model, k, track[t]) + log_sum_exp(terms);
    }
    std::swap(alpha, next);
  }
  return log_sum_exp(alpha);
}

StateDecoding map_states(std::span<const ScoredBox> track, const HmmModel& model) {
  if (track.empty()) throw std::invalid_argument("map_states: empty track");
  const std::size_t T = track.size();
  const std::size_t K = model.states();
  std::vector<double> delta(K), next(K);
  std::vector<std::vector<std::size_t>> back(T, std::vector<std::size_t>(K, 0));
  for (std::size_t k = 0; k < K; ++k)
    delta[k] = model.log_init[k] + emission_logprob(model, k, track[0]);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t k = 0; k < K; ++k) {
      double best = delta[0] + model.trans(0, k);
      std::size_t arg = 0;
      for (std::size_t kp = 1; kp < K; ++kp) {
        const double v = delta[kp] + model.trans(kp, k);
        if (v > best) {
          best = v;
          arg = kp;
        }
      }
      next[k] = best + emission_logprob(model, k, track[t]);
      back[t][k] = arg;
    }
    std::swap(delta, next);
  }
  StateDecoding out;
  out.states.resize(T);
  std::size_t k = 0;
  for (std::size_t i = 1; i < K; ++i)
    if (delta[i] > delta[k]) k = i;
  out.score = delta[k];
  for (std::size_t t = T; t-- > 0;) {
    out.states[t] = k;
    if (t > 0) k = back[t][k];
  }
  return out;
}

CoherencyTable::CoherencyTable(std::span<const FrameDetections> frames,
                               const CoherencyParams& params)
    : table_(frames.size()), width_(frames.size(), 0) {
  for (std::size_t t = 1; t < frames.size(); ++t) {
    const auto& prev = frames[t - 1];
    const auto& cur = frames[t];
    width_[t] = cur.size();
    table_[t].resize(prev.size() * cur.size());
    for (std::size_t jp = 0; jp < prev.size(); ++jp)
      for (std::size_t j = 0; j < cur.size(); ++j) {
        table_[t][jp * cur.size() + j] = coherency_g(prev[jp], cur[j], params);
        ++evaluations_;
      }
  }
}

void fill_event_terms(JointResult& r, const HmmModel& model) {
  const auto& picks = r.track.picks;
  r.h_sum = 0.0;
  r.a_sum = 0.0;
  for (std::size_t t = 0; t < picks.size(); ++t) {
    r.h_sum += emission_logprob(model, r.states[t], picks[t]);
    if (t > 0) r.a_sum += model.trans(r.states[t - 1], r.states[t]);
  }
  r.init_term = model.log_init[r.states[0]];
  r.objective = r.track.f_sum() + r.track.g_sum() + r.h_sum + r.a_sum + r.init_term;
}

JointResult joint_track_event(std::span<const FrameDetections> frames, const HmmModel& model,
                              const CoherencyParams& params, JointForm form) {
  check_frames(frames);
  model.validate();
  if (form == JointForm::factored) {
    const CoherencyTable table(frames, params);
    JointResult r = joint_track_event(frames, model, params, table);
    r.g_evaluations = table.evaluations();
    return r;
  }
  std::size_t evaluations = 0;
  JointResult r = joint_decode(frames, model, params, form,
                               [&](std::size_t t, std::size_t jp, std::size_t j) {
                                 ++evaluations;
                                 return coherency_g(frames[t - 1][jp], frames[t][j], params);
                               });
  r.g_evaluations = evaluations;
  return r;
}

JointResult joint_track_event(std::span<const FrameDetections> frames, const HmmModel& model,
                              const CoherencyParams& params, const CoherencyTable& table) {
  check_frames(frames);
  model.validate();
  return joint_decode(frames, model, params, JointForm::factored,
                      [&](std::size_t t, std::size_t jp, std::size_t j) {
                        return table(t, jp, j);
                      });
}

namespace {

template <class R>
void sort_ranked(std::vector<R>& v, auto score, auto name) {
  std::stable_sort(v.begin(), v.end(), [&](const R& a, const R& b) {
    if (score(a) != score(b)) return score(a) > score(b);
    return name(a) < name(b);
  });
}

}  // namespace

MultiJointResult joint_multi_model(std::span<const FrameDetections> frames,
                                   std::span<const HmmModel> models,
                                   const CoherencyParams& params) {
  if (models.empty()) throw std::invalid_argument("no event models given");
  check_frames(frames);
  const CoherencyTable table(frames, params);
  MultiJointResult out;
  for (const auto& m : models) {
    out.results.push_back(joint_track_event(frames, m, params, table));
    out.results.back().g_evaluations = 0;
  }
  out.g_evaluations = table.evaluations();
  sort_ranked(
      out.results, [](const JointResult& r) { return r.objective; },
      [](const JointResult& r) -> const std::string& { return r.event; });
  return out;
}

std::vector<RankedLabel> classify(std::span<const ScoredBox> track,
                                  std::span<const HmmModel> models, ClassifyMode mode) {
  if (models.empty()) throw std::invalid_argument("no event models given");
  if (mode == ClassifyMode::joint)
    throw std::invalid_argument("joint classification needs per-frame candidates");
  std::vector<RankedLabel> out;
  for (const auto& m : models) {
    m.validate();
    const double s = mode == ClassifyMode::ml ? forward_log_likelihood(track, m)
                                              : map_states(track, m).score;
    out.push_back({m.name, s});
  }
  sort_ranked(
      out, [](const RankedLabel& r) { return r.score; },
      [](const RankedLabel& r) -> const std::string& { return r.label; });
  return out;
}

std::vector<RankedLabel> classify(std::span<const FrameDetections> frames,
                                  std::span<const HmmModel> models,
                                  const CoherencyParams& params) {
  const auto multi = joint_multi_model(frames, models, params);
  std::vector<RankedLabel> out;
  for (const auto& r : multi.results) out.push_back({r.event, r.objective});
  return out;
}

}  // namespace latfuse
