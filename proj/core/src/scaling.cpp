#include "latfuse/scaling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>

#include "latfuse/synth.hpp"

namespace latfuse {
namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point a) { return std::chrono::duration<double>(Clock::now() - a).count(); }

// One engine on one ladder size. Batches of all jobs are interleaved trial
// by trial so that slow drift in machine speed hits every size alike.
struct TimingJob {
  std::function<void()> run;
  long reps = 1;
  double best = 0.0;

  void calibrate(double min_batch_seconds) {
    const auto start = Clock::now();
    run();
    best = since(start);
    reps = std::max(1L, static_cast<long>(std::ceil(min_batch_seconds / std::max(best, 1e-9))));
  }

  void batch() {
    const auto start = Clock::now();
    for (long r = 0; r < reps; ++r) run();
    best = std::min(best, since(start) / static_cast<double>(reps));
  }
};

}  // namespace

std::vector<DetectionPrism> random_prisms(std::size_t cells, std::size_t frames,
                                          std::size_t levels, std::uint64_t seed) {
  if (cells < levels || levels == 0 || frames == 0)
    throw std::invalid_argument("random_prisms: need cells >= levels >= 1 and frames >= 1");
  const std::size_t plane = cells / levels;
  auto X = static_cast<std::size_t>(std::sqrt(static_cast<double>(plane)));
  // Prefer an exact power-of-two split so the ladder doubles exactly.
  std::size_t pow2 = 1;
  while (pow2 * 2 <= X) pow2 *= 2;
  if (plane % pow2 == 0) X = pow2;
  X = std::max<std::size_t>(X, 1);
  const std::size_t Y = (plane + X - 1) / X;

  Rng rng(seed);
  std::vector<DetectionPrism> out;
  for (std::size_t t = 0; t < frames; ++t) {
    DetectionPrism p;
    p.frame = static_cast<int>(t);
    p.grid = Grid3D(X, Y, levels);
    for (double& v : p.grid.values) v = rng.normal(0.0, 1.0);
    p.scale_map.factors.assign(levels, 1.0);
    out.push_back(std::move(p));
  }
  return out;
}

ScalingReport run_scaling_ladder(const LadderSpec& spec) {
  if (spec.cells.empty()) throw std::invalid_argument("empty size ladder");
  const std::size_t n = spec.cells.size();
  std::vector<std::vector<DetectionPrism>> inputs;
  std::vector<PrismTrack> linear(n), quad(n);
  std::vector<TimingJob> jobs;
  for (std::size_t i = 0; i < n; ++i) {
    inputs.push_back(random_prisms(spec.cells[i], spec.frames, spec.levels, spec.seed + i));
  }
  for (std::size_t i = 0; i < n; ++i) {
    jobs.push_back({[&, i] { linear[i] = track_prisms(inputs[i], spec.alpha); }});
    if (spec.run_quadratic)
      jobs.push_back({[&, i] { quad[i] = track_prisms_quadratic(inputs[i], spec.alpha); }});
  }
  for (auto& job : jobs) job.calibrate(spec.min_batch_seconds);
  for (int trial = 0; trial < spec.trials; ++trial)
    for (auto& job : jobs) job.batch();

  ScalingReport rep;
  const std::size_t per_row = spec.run_quadratic ? 2 : 1;
  for (std::size_t i = 0; i < n; ++i) {
    LadderRow row;
    const auto& g = inputs[i][0].grid;
    row.X = g.X;
    row.Y = g.Y;
    row.S = g.S;
    row.cells = g.size();
    row.t_linear = jobs[i * per_row].best;
    row.objective_linear = linear[i].objective;
    if (spec.run_quadratic) {
      row.t_quadratic = jobs[i * per_row + 1].best;
      row.objective_quadratic = quad[i].objective;
      const double scale = std::max(1.0, std::abs(quad[i].objective));
      row.objectives_match = std::abs(quad[i].objective - linear[i].objective) <= 1e-9 * scale;
    }
    if (!rep.rows.empty()) {
      const auto& prev = rep.rows.back();
      row.ratio_linear = row.t_linear / prev.t_linear;
      if (row.t_quadratic && prev.t_quadratic) row.ratio_quadratic = *row.t_quadratic / *prev.t_quadratic;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

std::string format_scaling_table(const ScalingReport& report) {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%9s %14s %14s %10s %10s %8s\n", "N", "t_quadratic",
                "t_linear", "ratio_quad", "ratio_lin", "check");
  out += buf;
  auto opt = [](const std::optional<double>& v, const char* fmt) {
    char b[32];
    if (!v) return std::string("n/a");
    std::snprintf(b, sizeof b, fmt, *v);
    return std::string(b);
  };
  for (const auto& r : report.rows) {
    const char* check = !r.objectives_match ? "n/a" : (*r.objectives_match ? "equal" : "DIFFER");
    std::snprintf(buf, sizeof buf, "%9zu %14s %14.6e %10s %10s %8s\n", r.cells,
                  opt(r.t_quadratic, "%.6e").c_str(), r.t_linear,
                  opt(r.ratio_quadratic, "%.3f").c_str(), opt(r.ratio_linear, "%.3f").c_str(),
                  check);
    out += buf;
  }
  return out;
}

void write_plot_data(std::ostream& os, const ScalingReport& report) {
  os << "# cells engine seconds\n";
  for (const auto& r : report.rows) {
    os << r.cells << " linear " << r.t_linear << '\n';
    if (r.t_quadratic) os << r.cells << " quadratic " << *r.t_quadratic << '\n';
  }
}

}  // namespace latfuse
