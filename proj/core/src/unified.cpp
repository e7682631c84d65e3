#include "latfuse/unified.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "latfuse/gdt.hpp"

namespace latfuse {
namespace {

void check_inputs(std::span<const DetectionPrism> prisms, double alpha) {
  check_shared_geometry(prisms);
  if (!prisms[0].scale_map.uniform())
    throw std::invalid_argument(
        "prism scale map is not uniform; resample to a reference grid first");
  if (!std::isfinite(alpha) || alpha < 0.0)
    throw std::invalid_argument("alpha must be finite and non-negative");
}

std::vector<ScoredBox> cell_boxes(const DetectionPrism& prism) {
  std::vector<ScoredBox> out(prism.grid.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = prism.realize(c);
  return out;
}

UnifiedResult decode(std::span<const DetectionPrism> prisms, const HmmModel& model,
                     double alpha, const std::vector<ScoredBox>& boxes) {
  model.validate();
  const std::size_t T = prisms.size();
  const std::size_t K = model.states();
  const std::size_t N = prisms[0].grid.size();
  const double pi = prisms[0].scale_map[0];

  // h depends on geometry only, which every frame shares.
  std::vector<double> h(N * K);
  for (std::size_t c = 0; c < N; ++c)
    for (std::size_t k = 0; k < K; ++k) h[c * K + k] = emission_logprob(model, k, boxes[c]);

  // delta[c*K + k]; back[t][c*K + k] = c'*K + k'.
  std::vector<double> delta(N * K), next(N * K);
  std::vector<std::vector<std::size_t>> back(T);
  for (std::size_t c = 0; c < N; ++c)
    for (std::size_t k = 0; k < K; ++k)
      delta[c * K + k] = prisms[0].grid.values[c] + h[c * K + k] + model.log_init[k];

  Grid3D slice = prisms[0].grid;
  slice.wx = slice.wy = pi * pi;
  slice.ws = alpha;
  std::vector<Transform3D> moved(K);

  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t kp = 0; kp < K; ++kp) {
      for (std::size_t c = 0; c < N; ++c) slice.values[c] = delta[c * K + kp];
      transform_3d(slice, moved[kp]);
    }
    back[t].resize(N * K);
    const auto& f = prisms[t].grid.values;
    for (std::size_t c = 0; c < N; ++c)
      for (std::size_t k = 0; k < K; ++k) {
        double best = 0.0;
        std::size_t arg = 0;
        for (std::size_t kp = 0; kp < K; ++kp) {
          const double v = model.trans(kp, k) + moved[kp].transformed.values[c];
          if (kp == 0 || v > best) {
            best = v;
            arg = moved[kp].argmax[c] * K + kp;
          }
        }
        next[c * K + k] = f[c] + h[c * K + k] + best;
        back[t][c * K + k] = arg;
      }
    std::swap(delta, next);
  }

  std::size_t node = 0;
  for (std::size_t i = 1; i < delta.size(); ++i)
    if (delta[i] > delta[node]) node = i;
  std::vector<std::size_t> idx(T), states(T);
  for (std::size_t t = T; t-- > 0;) {
    idx[t] = node / K;
    states[t] = node % K;
    if (t > 0) node = back[t][node];
  }
  return make_unified_result(prisms, model, alpha, idx, states);
}

}  // namespace

double UnifiedResult::f_sum() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.f;
  return s;
}

double UnifiedResult::g_sum() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.g;
  return s;
}

UnifiedResult make_unified_result(std::span<const DetectionPrism> prisms,
                                  const HmmModel& model, double alpha,
                                  std::span<const std::size_t> indices,
                                  std::span<const std::size_t> states) {
  if (states.size() != indices.size())
    throw std::invalid_argument("one state per frame required");
  const PrismTrack track = make_prism_track(prisms, indices, alpha);
  UnifiedResult r;
  r.cells = track.cells;
  r.indices = track.indices;
  r.boxes = track.boxes;
  r.terms = track.terms;
  r.states.assign(states.begin(), states.end());
  r.event = model.name;
  for (std::size_t t = 0; t < r.states.size(); ++t) {
    if (r.states[t] >= model.states()) throw std::invalid_argument("state out of range");
    r.h_terms.push_back(emission_logprob(model, r.states[t], r.boxes[t]));
    r.a_terms.push_back(t > 0 ? model.trans(r.states[t - 1], r.states[t]) : 0.0);
    r.h_sum += r.h_terms.back();
    r.a_sum += r.a_terms.back();
  }
  r.init_term = model.log_init[r.states[0]];
  r.objective = r.f_sum() + r.g_sum() + r.h_sum + r.a_sum + r.init_term;
  return r;
}

UnifiedResult detect_track_recognize(std::span<const DetectionPrism> prisms,
                                     const HmmModel& model, double alpha) {
  check_inputs(prisms, alpha);
  return decode(prisms, model, alpha, cell_boxes(prisms[0]));
}

std::vector<UnifiedResult> recognize_all(std::span<const DetectionPrism> prisms,
                                         std::span<const HmmModel> models, double alpha) {
  if (models.empty()) throw std::invalid_argument("no event models given");
  check_inputs(prisms, alpha);
  const auto boxes = cell_boxes(prisms[0]);
  std::vector<UnifiedResult> out;
  out.reserve(models.size());
  for (const auto& m : models) out.push_back(decode(prisms, m, alpha, boxes));
  std::stable_sort(out.begin(), out.end(), [](const UnifiedResult& a, const UnifiedResult& b) {
    if (a.objective != b.objective) return a.objective > b.objective;
    return a.event < b.event;
  });
  return out;
}

}  // namespace latfuse
