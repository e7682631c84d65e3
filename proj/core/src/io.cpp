#include "latfuse/io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "latfuse/error.hpp"

namespace latfuse::io {
namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw FormatError("line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_real(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && tok[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) fail(line, "expected a number, got '" + tok + "'");
  return v;
}

long long parse_int(const std::string& tok, std::size_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    fail(line, "expected an integer, got '" + tok + "'");
  return v;
}

std::size_t parse_size(const std::string& tok, std::size_t line) {
  const long long v = parse_int(tok, line);
  if (v < 0) fail(line, "expected a non-negative integer, got '" + tok + "'");
  return static_cast<std::size_t>(v);
}

// Reads lines, checks the header, and hands back non-blank lines with their
// numbers. Lines starting with '#' are returned too; callers decide.
class LineReader {
 public:
  LineReader(std::istream& is, const char* header) : is_(is) {
    std::string first;
    while (std::getline(is_, first)) {
      ++line_;
      strip(first);
      if (!first.empty()) break;
    }
    if (first != header)
      fail(line_, std::string("missing header ") + header);
  }

  bool next(std::string& out) {
    while (std::getline(is_, out)) {
      ++line_;
      strip(out);
      if (!out.empty()) return true;
    }
    return false;
  }
  std::size_t line() const { return line_; }

 private:
  static void strip(std::string& s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    s.erase(0, i);
  }

  std::istream& is_;
  std::size_t line_ = 0;
};

// Whitespace token stream across lines, skipping '#' lines.
class TokenReader {
 public:
  TokenReader(std::istream& is, const char* header) : lines_(is, header) {}

  bool next(std::string& tok) {
    while (pos_ >= toks_.size()) {
      std::string line;
      do {
        if (!lines_.next(line)) return false;
      } while (line[0] == '#');
      toks_ = split(line);
      pos_ = 0;
    }
    tok = toks_[pos_++];
    return true;
  }
  std::string expect() {
    std::string t;
    if (!next(t)) fail(lines_.line(), "unexpected end of input");
    return t;
  }
  void keyword(const char* kw) {
    const std::string t = expect();
    if (t != kw) fail(lines_.line(), std::string("expected '") + kw + "', got '" + t + "'");
  }
  double real() { return parse_real(expect(), lines_.line()); }
  std::size_t size() { return parse_size(expect(), lines_.line()); }
  long long integer() { return parse_int(expect(), lines_.line()); }
  std::size_t line() const { return lines_.line(); }

 private:
  LineReader lines_;
  std::vector<std::string> toks_;
  std::size_t pos_ = 0;
};

template <class F>
auto rethrow_as_format(std::size_t line, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    fail(line, e.what());
  }
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_real: conversion failed");
  return std::string(buf, ptr);
}

void write_detections(std::ostream& os, std::span<const FrameDetections> frames) {
  os << kDetectionsHeader << '\n';
  os << "#frames " << frames.size() << '\n';
  for (const auto& f : frames)
    for (const auto& b : f.boxes())
      os << b.frame << ' ' << format_real(b.cx) << ' ' << format_real(b.cy) << ' '
         << format_real(b.w) << ' ' << format_real(b.h) << ' ' << format_real(b.score) << ' '
         << b.source_id << '\n';
}

std::vector<FrameDetections> read_detections(std::istream& is) {
  LineReader lines(is, kDetectionsHeader);
  std::vector<std::vector<ScoredBox>> by_frame;
  std::size_t declared = 0;
  std::string line;
  while (lines.next(line)) {
    const auto tok = split(line);
    if (line[0] == '#') {
      if (tok[0] == "#frames" && tok.size() == 2) declared = parse_size(tok[1], lines.line());
      continue;
    }
    if (tok.size() != 7) fail(lines.line(), "expected 7 fields: frame cx cy w h score source_id");
    ScoredBox b;
    const long long frame = parse_int(tok[0], lines.line());
    if (frame < 0) fail(lines.line(), "negative frame index");
    b.frame = static_cast<int>(frame);
    b.cx = parse_real(tok[1], lines.line());
    b.cy = parse_real(tok[2], lines.line());
    b.w = parse_real(tok[3], lines.line());
    b.h = parse_real(tok[4], lines.line());
    b.score = parse_real(tok[5], lines.line());
    b.source_id = static_cast<int>(parse_int(tok[6], lines.line()));
    rethrow_as_format(lines.line(), [&] { validate(b); return 0; });
    if (by_frame.size() <= static_cast<std::size_t>(frame)) by_frame.resize(frame + 1);
    by_frame[frame].push_back(b);
  }
  if (declared > by_frame.size()) by_frame.resize(declared);
  std::vector<FrameDetections> out;
  for (std::size_t t = 0; t < by_frame.size(); ++t)
    out.emplace_back(static_cast<int>(t), std::move(by_frame[t]));
  return out;
}

namespace {

void write_track_line(std::ostream& os, const ScoredBox& b, std::size_t index) {
  os << b.frame << ' ' << format_real(b.cx) << ' ' << format_real(b.cy) << ' '
     << format_real(b.w) << ' ' << format_real(b.h) << ' ' << index << ' '
     << (b.projected ? 1 : 0) << '\n';
}

}  // namespace

void write_track(std::ostream& os, const Track& track) {
  os << kTrackHeader << '\n';
  os << "#objective " << format_real(track.objective) << " f " << format_real(track.f_sum())
     << " g " << format_real(track.g_sum()) << '\n';
  for (std::size_t t = 0; t < track.size(); ++t) write_track_line(os, track.picks[t], track.indices[t]);
}

void write_track(std::ostream& os, const PrismTrack& track) {
  double f = 0.0, g = 0.0;
  for (const auto& t : track.terms) {
    f += t.f;
    g += t.g;
  }
  os << kTrackHeader << '\n';
  os << "#objective " << format_real(track.objective) << " f " << format_real(f) << " g "
     << format_real(g) << '\n';
  for (std::size_t t = 0; t < track.size(); ++t) write_track_line(os, track.boxes[t], track.indices[t]);
}

TrackRecord read_track(std::istream& is) {
  LineReader lines(is, kTrackHeader);
  TrackRecord rec;
  std::string line;
  while (lines.next(line)) {
    if (line[0] == '#') continue;
    const auto tok = split(line);
    if (tok.size() != 7) fail(lines.line(), "expected 7 fields: frame cx cy w h index projected");
    ScoredBox b;
    b.frame = static_cast<int>(parse_int(tok[0], lines.line()));
    b.cx = parse_real(tok[1], lines.line());
    b.cy = parse_real(tok[2], lines.line());
    b.w = parse_real(tok[3], lines.line());
    b.h = parse_real(tok[4], lines.line());
    const std::size_t index = parse_size(tok[5], lines.line());
    const long long proj = parse_int(tok[6], lines.line());
    if (proj != 0 && proj != 1) fail(lines.line(), "projected flag must be 0 or 1");
    b.projected = proj == 1;
    rethrow_as_format(lines.line(), [&] { validate(b); return 0; });
    if (!rec.boxes.empty() && b.frame != rec.boxes.back().frame + 1)
      fail(lines.line(), "track frames must be consecutive");
    rec.boxes.push_back(b);
    rec.indices.push_back(index);
  }
  if (rec.boxes.empty()) fail(lines.line(), "track is empty");
  return rec;
}

void write_prisms(std::ostream& os, std::span<const DetectionPrism> prisms) {
  os << kPrismHeader << '\n';
  for (const auto& p : prisms) {
    const auto& g = p.grid;
    os << "prism " << p.frame << ' ' << g.X << ' ' << g.Y << ' ' << g.S << ' '
       << format_real(p.stride) << ' ' << format_real(p.alpha) << '\n';
    os << "pi";
    for (double f : p.scale_map.factors) os << ' ' << format_real(f);
    os << "\nlevels";
    const auto& levels = p.level_scale.empty() ? p.scale_map.factors : p.level_scale;
    for (double f : levels) os << ' ' << format_real(f);
    os << "\ntemplate " << format_real(p.template_w) << ' ' << format_real(p.template_h) << '\n';
    os << "scores\n";
    for (std::size_t x = 0; x < g.X; ++x) {
      for (std::size_t i = 0; i < g.Y * g.S; ++i) {
        if (i) os << ' ';
        os << format_real(g.values[x * g.Y * g.S + i]);
      }
      os << '\n';
    }
  }
}

std::vector<DetectionPrism> read_prisms(std::istream& is) {
  TokenReader in(is, kPrismHeader);
  std::vector<DetectionPrism> out;
  std::string tok;
  while (in.next(tok)) {
    if (tok != "prism") fail(in.line(), "expected 'prism', got '" + tok + "'");
    DetectionPrism p;
    p.frame = static_cast<int>(in.integer());
    const std::size_t X = in.size(), Y = in.size(), S = in.size();
    if (X == 0 || Y == 0 || S == 0) fail(in.line(), "prism dimensions must be positive");
    if (X * Y * S > (std::size_t{1} << 28)) fail(in.line(), "prism too large");
    p.stride = in.real();
    p.alpha = in.real();
    in.keyword("pi");
    for (std::size_t s = 0; s < S; ++s) p.scale_map.factors.push_back(in.real());
    in.keyword("levels");
    for (std::size_t s = 0; s < S; ++s) p.level_scale.push_back(in.real());
    in.keyword("template");
    p.template_w = in.real();
    p.template_h = in.real();
    in.keyword("scores");
    p.grid = Grid3D(X, Y, S);
    for (double& v : p.grid.values) v = in.real();
    rethrow_as_format(in.line(), [&] { p.validate(); return 0; });
    out.push_back(std::move(p));
  }
  if (out.empty()) fail(in.line(), "no prisms");
  return out;
}

void write_models(std::ostream& os, std::span<const HmmModel> models) {
  os << kHmmHeader << '\n';
  for (const auto& m : models) {
    const std::size_t K = m.states();
    os << "model " << m.name << '\n';
    os << "frame " << format_real(m.frame.width) << ' ' << format_real(m.frame.height) << '\n';
    os << "states " << K << '\n';
    os << "init";
    for (double v : m.log_init) os << ' ' << format_real(v);
    os << '\n';
    for (std::size_t k = 0; k < K; ++k) {
      os << "trans";
      for (std::size_t j = 0; j < K; ++j) os << ' ' << format_real(m.trans(k, j));
      os << '\n';
    }
    for (std::size_t k = 0; k < K; ++k) {
      const auto& e = m.emissions[k];
      os << "state " << k;
      if (e.kind == StateEmission::Kind::uniform) {
        os << " uniform " << format_real(e.log_density) << '\n';
        continue;
      }
      os << " gaussian";
      for (double v : e.mean) os << ' ' << format_real(v);
      for (double v : e.variance) os << ' ' << format_real(v);
      os << '\n';
    }
    os << "end\n";
  }
}

std::vector<HmmModel> read_models(std::istream& is) {
  TokenReader in(is, kHmmHeader);
  std::vector<HmmModel> out;
  std::string tok;
  while (in.next(tok)) {
    if (tok != "model") fail(in.line(), "expected 'model', got '" + tok + "'");
    HmmModel m;
    m.name = in.expect();
    in.keyword("frame");
    m.frame.width = in.real();
    m.frame.height = in.real();
    in.keyword("states");
    const std::size_t K = in.size();
    if (K == 0 || K > 4096) fail(in.line(), "state count out of range");
    in.keyword("init");
    for (std::size_t k = 0; k < K; ++k) m.log_init.push_back(in.real());
    for (std::size_t k = 0; k < K; ++k) {
      in.keyword("trans");
      for (std::size_t j = 0; j < K; ++j) m.log_trans.push_back(in.real());
    }
    for (std::size_t k = 0; k < K; ++k) {
      in.keyword("state");
      if (in.size() != k) fail(in.line(), "states must be listed in order");
      const std::string kind = in.expect();
      StateEmission e;
      if (kind == "uniform") {
        e = StateEmission::uniform(in.real());
      } else if (kind == "gaussian") {
        Features mean{}, var{};
        for (double& v : mean) v = in.real();
        for (double& v : var) v = in.real();
        e = StateEmission::gaussian(mean, var);
      } else {
        fail(in.line(), "unknown emission kind '" + kind + "'");
      }
      m.emissions.push_back(e);
    }
    in.keyword("end");
    rethrow_as_format(in.line(), [&] { m.validate(); return 0; });
    out.push_back(std::move(m));
  }
  if (out.empty()) fail(in.line(), "no models");
  return out;
}

void write_annotations(std::ostream& os, const std::map<std::string, AnnotationSet>& sets) {
  os << kAnnotationHeader << '\n';
  for (const auto& [video, set] : sets)
    for (const auto& t : set.tracks)
      for (const auto& [frame, r] : t.boxes)
        os << video << ' ' << t.id << ' ' << t.label << ' ' << frame << ' ' << format_real(r.x1)
           << ' ' << format_real(r.y1) << ' ' << format_real(r.x2) << ' ' << format_real(r.y2)
           << '\n';
}

std::map<std::string, AnnotationSet> read_annotations(std::istream& is) {
  LineReader lines(is, kAnnotationHeader);
  std::map<std::string, AnnotationSet> out;
  std::string line;
  while (lines.next(line)) {
    if (line[0] == '#') continue;
    const auto tok = split(line);
    if (tok.size() != 8) fail(lines.line(), "expected 8 fields: video track label frame x1 y1 x2 y2");
    Rect r{parse_real(tok[4], lines.line()), parse_real(tok[5], lines.line()),
           parse_real(tok[6], lines.line()), parse_real(tok[7], lines.line())};
    if (!(r.x2 > r.x1) || !(r.y2 > r.y1)) fail(lines.line(), "box has zero area");
    auto& set = out[tok[0]];
    set.video = tok[0];
    const int frame = static_cast<int>(parse_int(tok[3], lines.line()));
    rethrow_as_format(lines.line(), [&] { set.add_box(tok[1], tok[2], frame, r); return 0; });
  }
  return out;
}

void write_unified(std::ostream& os, const UnifiedResult& r) {
  os << kUnifiedHeader << '\n';
  os << "#event " << r.event << '\n';
  os << "#objective " << format_real(r.objective) << " f " << format_real(r.f_sum()) << " g "
     << format_real(r.g_sum()) << " h " << format_real(r.h_sum) << " a "
     << format_real(r.a_sum) << " init " << format_real(r.init_term) << '\n';
  double cumulative = r.init_term;
  for (std::size_t t = 0; t < r.cells.size(); ++t) {
    cumulative += r.terms[t].f + r.terms[t].g + r.h_terms[t] + r.a_terms[t];
    const auto& c = r.cells[t];
    const auto& b = r.boxes[t];
    os << b.frame << ' ' << c.x << ' ' << c.y << ' ' << c.s << ' ' << r.states[t] << ' '
       << format_real(b.cx) << ' ' << format_real(b.cy) << ' ' << format_real(b.w) << ' '
       << format_real(b.h) << ' ' << format_real(cumulative) << '\n';
  }
}

namespace {

struct RealField {
  const char* key;
  double Scenario::*member;
};

constexpr RealField kRealFields[] = {
    {"start_x", &Scenario::start_x},
    {"start_y", &Scenario::start_y},
    {"vx", &Scenario::vx},
    {"vy", &Scenario::vy},
    {"box_w", &Scenario::box_w},
    {"box_h", &Scenario::box_h},
    {"fp_rate", &Scenario::fp_rate},
    {"dropout", &Scenario::dropout},
    {"jitter", &Scenario::jitter},
    {"true_score_mean", &Scenario::true_score_mean},
    {"true_score_sd", &Scenario::true_score_sd},
    {"fp_score_mean", &Scenario::fp_score_mean},
    {"fp_score_sd", &Scenario::fp_score_sd},
    {"stride", &Scenario::stride},
    {"level_ratio", &Scenario::level_ratio},
    {"bump_width", &Scenario::bump_width},
    {"bump_amplitude", &Scenario::bump_amplitude},
    {"dropout_amplitude", &Scenario::dropout_amplitude},
    {"distractor_amplitude", &Scenario::distractor_amplitude},
    {"noise_floor", &Scenario::noise_floor},
};

struct IntField {
  const char* key;
  int Scenario::*member;
};

constexpr IntField kIntFields[] = {
    {"frames", &Scenario::frames},
    {"levels", &Scenario::levels},
    {"true_level", &Scenario::true_level},
    {"distractors", &Scenario::distractors},
};

}  // namespace

void write_scenario(std::ostream& os, const Scenario& sc) {
  os << kScenarioHeader << '\n';
  os << "seed " << sc.seed << '\n';
  os << "frame_width " << format_real(sc.frame.width) << '\n';
  os << "frame_height " << format_real(sc.frame.height) << '\n';
  for (const auto& f : kIntFields) os << f.key << ' ' << sc.*(f.member) << '\n';
  for (const auto& f : kRealFields) os << f.key << ' ' << format_real(sc.*(f.member)) << '\n';
}

Scenario read_scenario(std::istream& is) {
  LineReader lines(is, kScenarioHeader);
  Scenario sc;
  std::string line;
  while (lines.next(line)) {
    if (line[0] == '#') continue;
    const auto tok = split(line);
    if (tok.size() != 2) fail(lines.line(), "expected 'key value'");
    const std::string& key = tok[0];
    const std::size_t n = lines.line();
    if (key == "seed") {
      const auto [ptr, ec] = std::from_chars(tok[1].data(), tok[1].data() + tok[1].size(), sc.seed);
      if (ec != std::errc() || ptr != tok[1].data() + tok[1].size()) fail(n, "bad seed");
      continue;
    }
    if (key == "frame_width") { sc.frame.width = parse_real(tok[1], n); continue; }
    if (key == "frame_height") { sc.frame.height = parse_real(tok[1], n); continue; }
    bool known = false;
    for (const auto& f : kIntFields)
      if (key == f.key) {
        sc.*(f.member) = static_cast<int>(parse_int(tok[1], n));
        known = true;
      }
    for (const auto& f : kRealFields)
      if (key == f.key) {
        sc.*(f.member) = parse_real(tok[1], n);
        known = true;
      }
    if (!known) fail(n, "unknown scenario key '" + key + "'");
  }
  rethrow_as_format(lines.line(), [&] { sc.validate(); return 0; });
  return sc;
}

std::string format_agreement_table(std::span<const AgreementReport> reports) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %6s %9s %10s %10s\n", "class", "N", "overlaps", "mean", "sd");
  out += buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-10s %6zu %9zu %10.6f %10.6f\n", to_string(r.track_class),
                  r.videos, r.overlaps, r.mean, r.stddev);
    out += buf;
  }
  return out;
}

}  // namespace latfuse::io
