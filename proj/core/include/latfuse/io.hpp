#pragma once

// Line-oriented text formats. Every file opens with a versioned header line;
// other lines starting with '#' are directives or comments. Reals are written
// in shortest round-trip form, so write -> read -> write is byte-identical.
// Readers throw FormatError with a line number on malformed input.

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "latfuse/core.hpp"
#include "latfuse/eval.hpp"
#include "latfuse/events.hpp"
#include "latfuse/pyramid.hpp"
#include "latfuse/synth.hpp"
#include "latfuse/tracking.hpp"
#include "latfuse/unified.hpp"

namespace latfuse::io {

inline constexpr const char* kDetectionsHeader = "#lattice-fusion/detections/v1";
inline constexpr const char* kTrackHeader = "#lattice-fusion/track/v1";
inline constexpr const char* kPrismHeader = "#lattice-fusion/prism/v1";
inline constexpr const char* kHmmHeader = "#lattice-fusion/hmm/v1";
inline constexpr const char* kAnnotationHeader = "#lattice-fusion/annot/v1";
inline constexpr const char* kUnifiedHeader = "#lattice-fusion/unified/v1";
inline constexpr const char* kScenarioHeader = "#lattice-fusion/scenario/v1";

std::string format_real(double v);

// Detections: `frame cx cy w h score source_id` per line. A `#frames N`
// directive fixes the frame count so trailing empty frames survive.
void write_detections(std::ostream& os, std::span<const FrameDetections> frames);
std::vector<FrameDetections> read_detections(std::istream& is);

// Tracks: `frame cx cy w h index projected` per line, plus `#objective`.
struct TrackRecord {
  std::vector<ScoredBox> boxes;
  std::vector<std::size_t> indices;
};
void write_track(std::ostream& os, const Track& track);
void write_track(std::ostream& os, const PrismTrack& track);
TrackRecord read_track(std::istream& is);

// Prisms: one block per frame.
//   prism <frame> <X> <Y> <S> <stride> <alpha>
//   pi <S factors>
//   levels <S box size factors>
//   template <w> <h>
//   scores <X*Y*S values, row-major (x, y, s)>
void write_prisms(std::ostream& os, std::span<const DetectionPrism> prisms);
std::vector<DetectionPrism> read_prisms(std::istream& is);

// Event models: `model <name>` ... `end` blocks holding frame, states,
// init, trans and one `state` line per state, all in log space.
void write_models(std::ostream& os, std::span<const HmmModel> models);
std::vector<HmmModel> read_models(std::istream& is);

// Annotations: `video track label frame x1 y1 x2 y2` per line, keyed by video.
void write_annotations(std::ostream& os, const std::map<std::string, AnnotationSet>& sets);
std::map<std::string, AnnotationSet> read_annotations(std::istream& is);

// Unified results: `frame x y s k cx cy w h cumulative` per line.
void write_unified(std::ostream& os, const UnifiedResult& result);

// Scenario: `key value` per line; unknown keys are errors.
void write_scenario(std::ostream& os, const Scenario& sc);
Scenario read_scenario(std::istream& is);

/// Aligned (class, N, mean, sd) table, one row per report.
std::string format_agreement_table(std::span<const AgreementReport> reports);

}  // namespace latfuse::io
