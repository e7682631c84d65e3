#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "latfuse/events.hpp"
#include "latfuse/pyramid.hpp"

namespace latfuse {

/// Jointly detected cell, tracked path and recognized state sequence.
struct UnifiedResult {
  std::vector<PrismCell> cells;
  std::vector<std::size_t> indices;
  std::vector<std::size_t> states;
  std::vector<ScoredBox> boxes;
  std::vector<FrameTerms> terms;  // f and g per frame
  std::vector<double> h_terms;
  std::vector<double> a_terms;    // zero in the first frame
  std::string event;
  double h_sum = 0.0;
  double a_sum = 0.0;
  double init_term = 0.0;
  double objective = 0.0;

  double f_sum() const;
  double g_sum() const;
};

/// Maximizes sum_t [f + h(k_t, cell_t)] + sum_{t>=1} [g + a(k_{t-1}, k_t)] over
/// every (cell, state) sequence. For each previous state the cell
/// maximization is one max-GDT, so a frame costs O(X*Y*S*K + X*Y*S*K^2).
/// h sees only the realized box of the current cell.
UnifiedResult detect_track_recognize(std::span<const DetectionPrism> prisms,
                                     const HmmModel& model, double alpha);

/// One detect_track_recognize per model, sharing the realized cell geometry.
/// Sorted by objective, descending; ties by event name.
std::vector<UnifiedResult> recognize_all(std::span<const DetectionPrism> prisms,
                                         std::span<const HmmModel> models, double alpha);

/// Terms and objective of a fixed cell and state sequence.
UnifiedResult make_unified_result(std::span<const DetectionPrism> prisms,
                                  const HmmModel& model, double alpha,
                                  std::span<const std::size_t> indices,
                                  std::span<const std::size_t> states);

}  // namespace latfuse
