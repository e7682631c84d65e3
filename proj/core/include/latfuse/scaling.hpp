#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "latfuse/pyramid.hpp"

namespace latfuse {

/// Doubling ladder over prism cell counts, timing the GDT tracker against
/// the all-pairs tracker on identical random prisms.
struct LadderSpec {
  std::vector<std::size_t> cells{2048, 4096, 8192, 16384};
  std::size_t frames = 3;
  std::size_t levels = 4;
  std::uint64_t seed = 1;
  double alpha = 1.0;
  // Each timing batch repeats the engine until it runs at least this long;
  // the reported time is the fastest per-run time over `trials` batches.
  double min_batch_seconds = 0.1;
  int trials = 7;
  bool run_quadratic = true;
};

struct LadderRow {
  std::size_t cells = 0;
  std::size_t X = 0, Y = 0, S = 0;
  double t_linear = 0.0;  // seconds per tracking run
  std::optional<double> t_quadratic;
  std::optional<double> ratio_linear;  // t(N) / t(N/2)-step, vs the previous row
  std::optional<double> ratio_quadratic;
  double objective_linear = 0.0;
  std::optional<double> objective_quadratic;
  std::optional<bool> objectives_match;  // relative 1e-9
};

struct ScalingReport {
  std::vector<LadderRow> rows;
};

/// Random prism sequence with about `cells` cells per frame.
std::vector<DetectionPrism> random_prisms(std::size_t cells, std::size_t frames,
                                          std::size_t levels, std::uint64_t seed);

ScalingReport run_scaling_ladder(const LadderSpec& spec);

/// Aligned (N, t_quadratic, t_linear, ratios, check) table; "n/a" where a
/// ratio has no predecessor.
std::string format_scaling_table(const ScalingReport& report);

/// `cells engine seconds` lines for plotting.
void write_plot_data(std::ostream& os, const ScalingReport& report);

}  // namespace latfuse
