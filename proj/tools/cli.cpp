#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "latfuse/error.hpp"
#include "latfuse/eval.hpp"
#include "latfuse/events.hpp"
#include "latfuse/io.hpp"
#include "latfuse/pyramid.hpp"
#include "latfuse/scaling.hpp"
#include "latfuse/synth.hpp"
#include "latfuse/tracking.hpp"
#include "latfuse/unified.hpp"

namespace latfuse::cli {
namespace {

using io::format_real;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

template <class F>
void write_file(const std::string& path, F&& write) {
  if (path.empty()) return;
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  write(os);
  if (!os) throw IoError("write failed: " + path);
}

// Options shared by the detection-based commands.
struct DetectionOptions {
  std::string input;
  std::string g_form = "euclidean";
  std::vector<double> velocity;
  std::string project = "none";
  double penalty = 0.0;
  std::size_t top_k = 0;
  std::optional<double> trained_threshold;
  double epsilon = kDefaultOtsuEpsilon;

  void add_to(CLI::App* app) {
    app->add_option("--input,-i", input, "Detections file")->required();
    app->add_option("--g-form", g_form, "Coherency: euclidean or squared")
        ->check(CLI::IsMember({"euclidean", "squared"}));
    app->add_option("--velocity", velocity, "Constant-velocity projection VX VY")->expected(2);
    app->add_option("--project", project, "Forward projection: none, fill (empty frames) or all")
        ->check(CLI::IsMember({"none", "fill", "all"}));
    app->add_option("--penalty", penalty, "Score penalty on projected boxes");
    app->add_option("--top-k", top_k, "Keep the k best boxes per frame (0 keeps all)");
    app->add_option("--trained-threshold", trained_threshold,
                    "Pool sources with per-source Otsu offsets against this threshold");
    app->add_option("--epsilon", epsilon, "Otsu offset slack above the trained threshold");
  }

  CoherencyParams params() const {
    CoherencyParams p;
    if (velocity.size() == 2) p.motion = MotionModel::constant_velocity(velocity[0], velocity[1]);
    p.g_form = g_form == "squared" ? GForm::negative_squared_euclidean : GForm::negative_euclidean;
    p.projection_penalty = penalty;
    return p;
  }

  std::vector<FrameDetections> load() const {
    auto in = open_in(input);
    auto frames = io::read_detections(in);
    if (trained_threshold) frames = pool_sources(frames);
    if (top_k > 0)
      for (auto& f : frames) f = latfuse::top_k(f, top_k);
    if (project != "none") frames = augment_with_projections(frames, params(), project == "fill");
    return frames;
  }

  std::vector<FrameDetections> pool_sources(const std::vector<FrameDetections>& frames) const {
    std::map<int, std::vector<FrameDetections>> by_source;
    for (const auto& f : frames)
      for (const auto& b : f.boxes()) by_source[b.source_id];
    for (auto& [id, split] : by_source)
      for (const auto& f : frames) {
        FrameDetections mine(f.frame());
        for (const auto& b : f.boxes())
          if (b.source_id == id) mine.add(b);
        split.push_back(std::move(mine));
      }
    std::vector<double> offsets;
    for (const auto& [id, split] : by_source) {
      const auto tops = top_scores(split);
      offsets.push_back(otsu_offset(tops, *trained_threshold, epsilon));
    }
    std::vector<FrameDetections> out;
    for (std::size_t t = 0; t < frames.size(); ++t) {
      std::vector<SourceDetections> sources;
      std::size_t s = 0;
      for (const auto& [id, split] : by_source) sources.push_back({split[t], offsets[s++]});
      out.push_back(pool_detections(frames[t].frame(), sources));
    }
    return out;
  }
};

std::vector<HmmModel> load_models(const std::string& path) {
  auto in = open_in(path);
  auto models = io::read_models(in);
  if (models.empty()) throw FormatError("no models in " + path);
  return models;
}

std::vector<DetectionPrism> load_prisms(const std::string& path, std::optional<double> reference) {
  auto in = open_in(path);
  auto prisms = io::read_prisms(in);
  if (prisms.empty()) throw FormatError("no prisms in " + path);
  bool uniform = true;
  for (const auto& p : prisms) uniform = uniform && p.scale_map.uniform();
  if (reference || !uniform) {
    const double stride = reference.value_or(prisms.front().stride);
    for (auto& p : prisms) p = resample_to_reference(p, stride);
  }
  return prisms;
}

void print_terms(std::ostream& out, const std::string& label, double objective, double f, double g) {
  out << label << " objective " << format_real(objective) << " f " << format_real(f) << " g "
      << format_real(g) << '\n';
}

void print_terms(std::ostream& out, const std::string& label, double objective, double f, double g,
                 double h, double a, double init) {
  out << label << " objective " << format_real(objective) << " f " << format_real(f) << " g "
      << format_real(g) << " h " << format_real(h) << " a " << format_real(a) << " init "
      << format_real(init) << '\n';
}

std::vector<std::size_t> parse_ladder(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size() || v == 0)
      throw std::invalid_argument("--ladder expects comma-separated positive cell counts");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw std::invalid_argument("--ladder is empty");
  return out;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Detection, tracking and event recognition on unified Viterbi lattices", "latfuse"};
  app.require_subcommand(1);

  // track
  DetectionOptions track_opts;
  std::string track_out;
  auto* track = app.add_subcommand("track", "Detection-based tracking over candidate boxes");
  track_opts.add_to(track);
  track->add_option("--output,-o", track_out, "Track file");

  // pyramid-track
  std::string pyr_in, pyr_out;
  std::optional<double> pyr_alpha, pyr_reference;
  bool pyr_quadratic = false;
  auto* pyr = app.add_subcommand("pyramid-track", "Simultaneous detection and tracking over prisms");
  pyr->add_option("--input,-i", pyr_in, "Prism file")->required();
  pyr->add_option("--output,-o", pyr_out, "Track file");
  pyr->add_option("--alpha", pyr_alpha, "Scale weight (default: the prisms' own)")
      ->check(CLI::NonNegativeNumber);
  pyr->add_option("--reference", pyr_reference, "Resample onto this stride first")
      ->check(CLI::PositiveNumber);
  pyr->add_flag("--quadratic", pyr_quadratic, "Use the all-pairs engine");

  // recognize
  std::string rec_in, rec_models, rec_mode = "ml", rec_out;
  auto* rec = app.add_subcommand("recognize", "Rank event models on a fixed track");
  rec->add_option("--input,-i", rec_in, "Track file")->required();
  rec->add_option("--models,-m", rec_models, "Event model file")->required();
  rec->add_option("--mode", rec_mode, "ml (forward likelihood) or map")
      ->check(CLI::IsMember({"ml", "map"}));
  rec->add_option("--output,-o", rec_out, "Ranking file");

  // joint
  DetectionOptions joint_opts;
  std::string joint_models, joint_out, joint_form = "factored";
  auto* joint = app.add_subcommand("joint", "Joint tracking and event recognition");
  joint_opts.add_to(joint);
  joint->add_option("--models,-m", joint_models, "Event model file")->required();
  joint->add_option("--form", joint_form, "factored or unfactored inner maximization")
      ->check(CLI::IsMember({"factored", "unfactored"}));
  joint->add_option("--output,-o", joint_out, "Track file of the top-ranked event");

  // unified
  std::string uni_in, uni_models, uni_out;
  std::optional<double> uni_alpha, uni_reference;
  auto* uni = app.add_subcommand("unified", "Joint detection, tracking and event recognition");
  uni->add_option("--input,-i", uni_in, "Prism file")->required();
  uni->add_option("--models,-m", uni_models, "Event model file")->required();
  uni->add_option("--alpha", uni_alpha, "Scale weight (default: the prisms' own)")
      ->check(CLI::NonNegativeNumber);
  uni->add_option("--reference", uni_reference, "Resample onto this stride first")
      ->check(CLI::PositiveNumber);
  uni->add_option("--output,-o", uni_out, "Result file of the top-ranked event");

  // eval
  std::string eval_a, eval_b, eval_out, eval_class = "all";
  std::size_t perm_cap = kDefaultPermutationCap;
  auto* ev = app.add_subcommand("eval", "Pooled IoU agreement between two annotation files");
  ev->add_option("--input,-i", eval_a, "First annotation file")->required();
  ev->add_option("--against,-a", eval_b, "Second annotation file")->required();
  ev->add_option("--perm-cap", perm_cap, "Largest track set searched exhaustively")
      ->check(CLI::PositiveNumber);
  ev->add_option("--class", eval_class, "person, nonperson or all")
      ->check(CLI::IsMember({"person", "nonperson", "all"}));
  ev->add_option("--output,-o", eval_out, "Table file");

  // synth
  std::string syn_in, syn_kind = "detections", syn_out;
  std::optional<std::uint64_t> syn_seed;
  std::optional<double> syn_dropout;
  auto* syn = app.add_subcommand("synth", "Generate synthetic detections, prisms or models");
  syn->add_option("--input,-i", syn_in, "Scenario file (defaults otherwise)");
  syn->add_option("--kind", syn_kind, "detections, prisms, truth, models or scenario")
      ->check(CLI::IsMember({"detections", "prisms", "truth", "models", "scenario"}));
  syn->add_option("--seed", syn_seed, "Overrides the scenario seed");
  syn->add_option("--dropout", syn_dropout, "Overrides the scenario dropout")->check(CLI::Range(0.0, 1.0));
  syn->add_option("--output,-o", syn_out, "Output file (stdout otherwise)");

  // bench
  std::string bench_ladder, bench_out;
  LadderSpec spec;
  bool bench_linear_only = false;
  auto* bench = app.add_subcommand("bench", "Scaling ladder: GDT vs all-pairs pyramid tracking");
  bench->add_option("--ladder", bench_ladder, "Comma-separated cell counts (default 2048,4096,8192,16384)");
  bench->add_option("--frames", spec.frames, "Frames per run")->check(CLI::PositiveNumber);
  bench->add_option("--levels", spec.levels, "Scale levels")->check(CLI::PositiveNumber);
  bench->add_option("--seed", spec.seed, "Prism seed");
  bench->add_option("--alpha", spec.alpha, "Scale weight")->check(CLI::NonNegativeNumber);
  bench->add_option("--trials", spec.trials, "Timing batches per engine")->check(CLI::PositiveNumber);
  bench->add_flag("--linear-only", bench_linear_only, "Skip the all-pairs engine");
  bench->add_option("--output,-o", bench_out, "Plot data file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) throw;
    app.exit(e, out, out);
    return kOk;
  }

  if (*track) {
    const auto frames = track_opts.load();
    const Track t = viterbi_track(frames, track_opts.params());
    print_terms(out, "track", t.objective, t.f_sum(), t.g_sum());
    write_file(track_out, [&](std::ostream& os) { io::write_track(os, t); });
  } else if (*pyr) {
    const auto prisms = load_prisms(pyr_in, pyr_reference);
    const double alpha = pyr_alpha.value_or(prisms.front().alpha);
    const PrismTrack t = pyr_quadratic ? track_prisms_quadratic(prisms, alpha) : track_prisms(prisms, alpha);
    double f = 0, g = 0;
    for (const auto& term : t.terms) {
      f += term.f;
      g += term.g;
    }
    print_terms(out, "pyramid-track", t.objective, f, g);
    write_file(pyr_out, [&](std::ostream& os) { io::write_track(os, t); });
  } else if (*rec) {
    auto in = open_in(rec_in);
    const auto record = io::read_track(in);
    if (record.boxes.empty()) throw FormatError("empty track in " + rec_in);
    const auto models = load_models(rec_models);
    const auto ranked = classify(record.boxes, models, rec_mode == "map" ? ClassifyMode::map : ClassifyMode::ml);
    std::ostringstream table;
    for (const auto& r : ranked) table << r.label << ' ' << format_real(r.score) << '\n';
    out << table.str();
    write_file(rec_out, [&](std::ostream& os) { os << table.str(); });
  } else if (*joint) {
    const auto frames = joint_opts.load();
    const auto models = load_models(joint_models);
    const auto params = joint_opts.params();
    std::vector<JointResult> results;
    std::size_t g_evals = 0;
    if (joint_form == "factored") {
      auto multi = joint_multi_model(frames, models, params);
      results = std::move(multi.results);
      g_evals = multi.g_evaluations;
    } else {
      for (const auto& m : models) {
        results.push_back(joint_track_event(frames, m, params, JointForm::unfactored));
        g_evals += results.back().g_evaluations;
      }
      std::stable_sort(results.begin(), results.end(), [](const JointResult& a, const JointResult& b) {
        return a.objective != b.objective ? a.objective > b.objective : a.event < b.event;
      });
    }
    for (const auto& r : results)
      print_terms(out, r.event, r.objective, r.track.f_sum(), r.track.g_sum(), r.h_sum, r.a_sum, r.init_term);
    out << "g-evaluations " << g_evals << '\n';
    write_file(joint_out, [&](std::ostream& os) { io::write_track(os, results.front().track); });
  } else if (*uni) {
    const auto prisms = load_prisms(uni_in, uni_reference);
    const auto models = load_models(uni_models);
    const auto results = recognize_all(prisms, models, uni_alpha.value_or(prisms.front().alpha));
    for (const auto& r : results)
      print_terms(out, r.event, r.objective, r.f_sum(), r.g_sum(), r.h_sum, r.a_sum, r.init_term);
    write_file(uni_out, [&](std::ostream& os) { io::write_unified(os, results.front()); });
  } else if (*ev) {
    auto ia = open_in(eval_a);
    auto ib = open_in(eval_b);
    const auto pairs = pair_videos(io::read_annotations(ia), io::read_annotations(ib));
    if (pairs.empty()) throw InfeasibleError("no videos in common");
    std::vector<AgreementReport> reports;
    for (TrackClass c : {TrackClass::person, TrackClass::nonperson}) {
      const bool wanted = eval_class == "all" || eval_class == to_string(c);
      if (!wanted) continue;
      try {
        reports.push_back(corpus_agreement(pairs, c, perm_cap));
      } catch (const InfeasibleError&) {
        if (eval_class != "all") throw;
      }
    }
    if (reports.empty()) throw InfeasibleError("no shared frames in any class");
    const std::string table = io::format_agreement_table(reports);
    out << table;
    write_file(eval_out, [&](std::ostream& os) { os << table; });
  } else if (*syn) {
    Scenario sc;
    if (!syn_in.empty()) {
      auto in = open_in(syn_in);
      sc = io::read_scenario(in);
    }
    if (syn_seed) sc.seed = *syn_seed;
    if (syn_dropout) sc.dropout = *syn_dropout;
    auto emit = [&](std::ostream& os) {
      if (syn_kind == "detections") {
        io::write_detections(os, gen_detections(sc).frames);
      } else if (syn_kind == "prisms") {
        io::write_prisms(os, gen_prisms(sc).prisms);
      } else if (syn_kind == "truth") {
        const auto truth = sc.ground_truth();
        std::vector<FrameDetections> frames;
        for (const auto& b : truth) frames.emplace_back(b.frame, std::vector<ScoredBox>{b});
        io::write_detections(os, frames);
      } else if (syn_kind == "models") {
        io::write_models(os, fixture_models(sc.frame, sc.box_w, sc.box_h));
      } else {
        io::write_scenario(os, sc);
      }
    };
    if (syn_out.empty())
      emit(out);
    else
      write_file(syn_out, emit);
  } else if (*bench) {
    if (!bench_ladder.empty()) spec.cells = parse_ladder(bench_ladder);
    spec.run_quadratic = !bench_linear_only;
    const auto report = run_scaling_ladder(spec);
    out << format_scaling_table(report);
    write_file(bench_out, [&](std::ostream& os) { write_plot_data(os, report); });
  }
  return kOk;
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out);
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << '\n';
    return kMalformed;
  } catch (const FormatError& e) {
    err << "error: format: " << one_line(e.what()) << '\n';
    return kMalformed;
  } catch (const InfeasibleError& e) {
    err << "error: infeasible: " << one_line(e.what()) << '\n';
    return kInfeasible;
  } catch (const IoError& e) {
    err << "error: io: " << one_line(e.what()) << '\n';
    return kMalformed;
  } catch (const std::invalid_argument& e) {
    err << "error: invalid: " << one_line(e.what()) << '\n';
    return kMalformed;
  }
}

}  // namespace latfuse::cli
