#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kantor/chroma.hpp"
#include "kantor/pitch.hpp"

namespace kantor {

/// One note or rest on the sixteenth grid. pitch == nullopt encodes a rest.
struct NoteEvent {
  int onset = 0;
  int duration = 1;
  std::optional<Pitch> pitch;

  bool is_rest() const { return !pitch.has_value(); }
  int offset() const { return onset + duration; }

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

/// Monophonic event list for one part; events sorted and non-overlapping.
struct Voice {
  Part part = Part::Soprano;
  std::vector<NoteEvent> events;

  friend bool operator==(const Voice&, const Voice&) = default;
};

struct TimeSignatureEvent {
  int at_measure = 0;
  int numerator = 4;
  int denominator = 4;  // power of two in {1,2,4,8,16}

  int frames_per_measure() const {
    return numerator * (kFramesPerWhole / denominator);
  }

  friend bool operator==(const TimeSignatureEvent&,
                         const TimeSignatureEvent&) = default;
};

struct ChordAnnotation {
  int onset = 0;
  Chromagram pitch_classes;
  std::string symbol;  // display only

  friend bool operator==(const ChordAnnotation&,
                         const ChordAnnotation&) = default;
};

/// Four-voice piece on the sixteenth grid. Soprano is mandatory for encoding;
/// other voices optional. All frame indices live in [0, total_frames).
struct Score {
  std::array<std::optional<Voice>, 4> voices;
  std::vector<TimeSignatureEvent> time_signatures;
  std::set<int> fermata_frames;
  std::vector<ChordAnnotation> chords;
  int total_frames = 0;

  bool has_voice(Part p) const { return voices[size_t(p)].has_value(); }
  const Voice& voice(Part p) const { return *voices[size_t(p)]; }
  Voice& set_voice(Part p) {
    auto& slot = voices[size_t(p)];
    if (!slot) slot = Voice{p, {}};
    return *slot;
  }

  friend bool operator==(const Score&, const Score&) = default;
};

/// True when the two scores match apart from chord display symbols.
inline bool equal_ignoring_symbols(const Score& a, const Score& b) {
  if (a.voices != b.voices || a.time_signatures != b.time_signatures ||
      a.fermata_frames != b.fermata_frames ||
      a.total_frames != b.total_frames ||
      a.chords.size() != b.chords.size())
    return false;
  for (size_t i = 0; i < a.chords.size(); ++i) {
    if (a.chords[i].onset != b.chords[i].onset ||
        a.chords[i].pitch_classes != b.chords[i].pitch_classes)
      return false;
  }
  return true;
}

/// Contiguous partition of [0, total_frames) into measures.
/// Each entry is (measure_start_frame, frames_in_measure); the final measure
/// may be truncated by total_frames.
inline std::vector<std::pair<int, int>> measure_grid(
    const std::vector<TimeSignatureEvent>& ts, int total_frames) {
  if (ts.empty())
    throw std::invalid_argument("measure_grid: empty time-signature list");
  if (total_frames < 1)
    throw std::invalid_argument("measure_grid: total_frames must be >= 1");

  std::vector<std::pair<int, int>> grid;
  size_t ts_idx = 0;
  int frame = 0;
  for (int measure = 0; frame < total_frames; ++measure) {
    while (ts_idx + 1 < ts.size() && ts[ts_idx + 1].at_measure <= measure)
      ++ts_idx;
    int len = ts[ts_idx].frames_per_measure();
    len = std::min(len, total_frames - frame);
    grid.emplace_back(frame, len);
    frame += len;
  }
  return grid;
}

struct Violation {
  std::string field;
  int frame = -1;
  std::string message;
};

/// Non-aborting invariant check. Empty result means the score is well formed
/// and encodable.
inline std::vector<Violation> validate(const Score& s) {
  std::vector<Violation> out;
  auto add = [&](std::string field, int frame, std::string msg) {
    out.push_back(Violation{std::move(field), frame, std::move(msg)});
  };

  if (s.total_frames < 1) add("total_frames", -1, "must be >= 1");
  if (!s.has_voice(Part::Soprano)) add("voices", -1, "soprano is mandatory");

  for (Part p : kAllParts) {
    if (!s.has_voice(p)) continue;
    const Voice& v = s.voice(p);
    std::string field = std::string("voices.") + part_name(p);
    if (v.part != p) add(field, -1, "part tag does not match slot");
    int prev_end = -1;
    for (const NoteEvent& e : v.events) {
      if (e.duration < 1) add(field, e.onset, "duration must be >= 1");
      if (e.onset < 0) add(field, e.onset, "negative onset");
      if (e.onset < prev_end)
        add(field, e.onset, "voice overlap (events must be sorted, disjoint)");
      if (e.offset() > s.total_frames)
        add(field, e.onset, "event extends past total_frames");
      if (e.pitch && !valid_midi(e.pitch->midi))
        add(field, e.onset, "midi pitch out of 0..127");
      prev_end = std::max(prev_end, e.offset());
    }
  }

  if (s.time_signatures.empty()) {
    add("time_signatures", -1, "at least one time signature required");
  } else {
    if (s.time_signatures.front().at_measure != 0)
      add("time_signatures", -1, "first event must be at measure 0");
    int prev_measure = -1;
    for (const auto& ts : s.time_signatures) {
      if (ts.numerator < 1)
        add("time_signatures", -1, "numerator must be >= 1");
      if (ts.denominator != 1 && ts.denominator != 2 && ts.denominator != 4 &&
          ts.denominator != 8 && ts.denominator != 16)
        add("time_signatures", -1, "denominator must be in {1,2,4,8,16}");
      if (ts.at_measure <= prev_measure)
        add("time_signatures", -1, "events must be at increasing measures");
      prev_measure = ts.at_measure;
    }
  }

  for (int f : s.fermata_frames)
    if (f < 0 || f >= s.total_frames)
      add("fermata_frames", f, "frame out of range");

  if (!s.chords.empty()) {
    if (s.chords.front().onset != 0)
      add("chords", s.chords.front().onset,
          "chords present but do not cover frame 0");
    int prev = -1;
    for (const ChordAnnotation& c : s.chords) {
      if (c.pitch_classes.empty()) add("chords", c.onset, "empty chord");
      if (c.onset <= prev)
        add("chords", c.onset, "onsets must be strictly increasing");
      if (c.onset >= s.total_frames)
        add("chords", c.onset, "onset past total_frames");
      prev = c.onset;
    }
  }

  return out;
}

}  // namespace kantor
