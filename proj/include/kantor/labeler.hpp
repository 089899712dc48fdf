#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "kantor/beat.hpp"
#include "kantor/score.hpp"

namespace kantor {

/// One vertical slice of the chordified score: every pitch class sounding
/// (attacked or held) during [onset, onset+duration).
struct ChordifiedSegment {
  int onset = 0;
  int duration = 0;
  Chromagram sounding;

  friend bool operator==(const ChordifiedSegment&,
                         const ChordifiedSegment&) = default;
};

/// Collapse a multi-voice score into a succession of pitch-class sets.
/// The timeline is cut at every event boundary of every voice; fully silent
/// stretches are omitted; adjacent segments with equal sets merge.
inline std::vector<ChordifiedSegment> chordify(const Score& s) {
  int voice_count = 0;
  for (Part p : kAllParts)
    if (s.has_voice(p)) ++voice_count;
  if (voice_count < 2)
    throw std::invalid_argument("chordify requires >=2 voices");

  std::set<int> cuts{0, s.total_frames};
  for (Part p : kAllParts) {
    if (!s.has_voice(p)) continue;
    for (const NoteEvent& e : s.voice(p).events) {
      cuts.insert(e.onset);
      cuts.insert(std::min(e.offset(), s.total_frames));
    }
  }

  auto sounding_at = [&](int frame) {
    Chromagram c;
    for (Part p : kAllParts) {
      if (!s.has_voice(p)) continue;
      for (const NoteEvent& e : s.voice(p).events) {
        if (e.onset > frame) break;
        if (!e.is_rest() && frame < e.offset()) c.set(pitch_class(*e.pitch));
      }
    }
    return c;
  };

  std::vector<ChordifiedSegment> out;
  int prev = -1;
  for (int cut : cuts) {
    if (prev >= 0 && cut > prev) {
      Chromagram c = sounding_at(prev);
      if (!c.empty()) {
        if (!out.empty() && out.back().sounding == c &&
            out.back().onset + out.back().duration == prev) {
          out.back().duration += cut - prev;
        } else {
          out.push_back(ChordifiedSegment{prev, cut - prev, c});
        }
      }
    }
    prev = cut;
  }
  return out;
}

enum class HarmonicRhythm { Beat, Half, Measure };

namespace detail {

inline int span_threshold(HarmonicRhythm hr) {
  switch (hr) {
    case HarmonicRhythm::Beat: return 1;
    case HarmonicRhythm::Half: return 2;
    case HarmonicRhythm::Measure: return 3;
  }
  return 1;
}

}  // namespace detail

/// Pick one chord per beat span by beat strength. Within each span the
/// segment whose onset carries the highest beat class wins (earliest onset
/// breaks ties); the annotation snaps to the span start. Consecutive equal
/// sets merge and the first annotation is pulled to frame 0.
inline std::vector<ChordAnnotation> label_chords(
    const Score& s, const std::vector<ChordifiedSegment>& segments,
    HarmonicRhythm rhythm = HarmonicRhythm::Beat) {
  if (segments.empty())
    throw std::invalid_argument("label_chords: no segments");

  auto measures = measure_map(s.time_signatures, s.total_frames);
  auto classes = beat_classes(measures, s.total_frames);
  int threshold = detail::span_threshold(rhythm);

  std::vector<int> span_starts{0};
  for (int t = 1; t < s.total_frames; ++t)
    if (classes[size_t(t)] >= threshold) span_starts.push_back(t);
  span_starts.push_back(s.total_frames);

  std::vector<ChordAnnotation> out;
  for (size_t i = 0; i + 1 < span_starts.size(); ++i) {
    int lo = span_starts[i], hi = span_starts[i + 1];
    const ChordifiedSegment* best = nullptr;
    for (const auto& seg : segments) {
      if (seg.onset < lo || seg.onset >= hi) continue;
      if (!best ||
          classes[size_t(seg.onset)] > classes[size_t(best->onset)])
        best = &seg;
    }
    if (!best) continue;  // chord held over from an earlier span
    if (!out.empty() && out.back().pitch_classes == best->sounding) continue;
    out.push_back(ChordAnnotation{lo, best->sounding, std::string{}});
  }

  if (!out.empty() && out.front().onset != 0) out.front().onset = 0;
  return out;
}

/// Display name for a pitch-class set via triad/seventh template matching.
/// Falls back to a dotted pitch-class list for unmatched sets.
inline std::string chord_symbol(const Chromagram& c) {
  struct Template {
    const char* suffix;
    std::initializer_list<int> intervals;
  };
  static const Template templates[] = {
      {"", {0, 4, 7}},       {"m", {0, 3, 7}},     {"dim", {0, 3, 6}},
      {"aug", {0, 4, 8}},    {"7", {0, 4, 7, 10}}, {"maj7", {0, 4, 7, 11}},
      {"m7", {0, 3, 7, 10}}, {"dim7", {0, 3, 6, 9}},
  };
  for (int root = 0; root < 12; ++root) {
    for (const auto& t : templates) {
      Chromagram probe;
      for (int iv : t.intervals) probe.set(root + iv);
      if (probe == c)
        return std::string(pitch_class_name(root)) + t.suffix;
    }
  }
  std::string fallback;
  for (int pc : c.pitch_classes()) {
    if (!fallback.empty()) fallback += ".";
    fallback += pitch_class_name(pc);
  }
  return fallback.empty() ? "?" : fallback;
}

/// Chordify, rank, and attach annotations (with display symbols) to a copy.
inline Score label_score(const Score& s,
                         HarmonicRhythm rhythm = HarmonicRhythm::Beat) {
  Score out = s;
  auto segments = chordify(s);
  out.chords = label_chords(s, segments, rhythm);
  for (auto& c : out.chords) c.symbol = chord_symbol(c.pitch_classes);
  return out;
}

}  // namespace kantor
