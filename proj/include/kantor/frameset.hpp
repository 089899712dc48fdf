#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "kantor/beat.hpp"
#include "kantor/score.hpp"
#include "kantor/vocabulary.hpp"

namespace kantor {

/// The 7 aligned per-frame sequences: four voice token rows, fermata bits,
/// beat classes, chord chromagrams. Token rows for absent voices are filled
/// with an all-rest stream and flagged off in `has_voice`. The source time
/// signatures ride along so decoding restores the full score.
struct FrameSet {
  int length = 0;
  std::array<std::vector<uint16_t>, 4> tokens;
  std::array<bool, 4> has_voice{};
  std::vector<uint8_t> fermata;
  std::vector<uint8_t> beat;
  std::vector<Chromagram> chord;
  std::vector<TimeSignatureEvent> time_signatures;

  const std::vector<uint16_t>& voice_tokens(Part p) const {
    return tokens[size_t(p)];
  }

  friend bool operator==(const FrameSet&, const FrameSet&) = default;
};

inline Chromagram chord_to_chroma(const ChordAnnotation& c) {
  if (c.pitch_classes.empty())
    throw std::invalid_argument("chord_to_chroma: empty pitch-class set");
  return c.pitch_classes;
}

namespace detail {

inline void encode_voice(const Voice& v, int total_frames,
                         std::vector<uint16_t>& out) {
  out.assign(size_t(total_frames), vocab::kHold);
  int cursor = 0;
  auto emit = [&](int onset, int duration, uint16_t onset_token) {
    out[size_t(onset)] = onset_token;
    for (int f = onset + 1; f < onset + duration; ++f)
      out[size_t(f)] = vocab::kHold;
  };
  for (const NoteEvent& e : v.events) {
    if (e.onset > cursor) emit(cursor, e.onset - cursor, vocab::kRest);
    emit(e.onset, e.duration,
         e.is_rest() ? vocab::kRest : uint16_t(e.pitch->midi));
    cursor = e.offset();
  }
  if (cursor < total_frames)
    emit(cursor, total_frames - cursor, vocab::kRest);
}

}  // namespace detail

/// Score -> frame sequences. Requires validate(score) to be clean.
inline FrameSet encode_score(const Score& s) {
  if (!s.has_voice(Part::Soprano))
    throw std::invalid_argument("encode_score: missing soprano");
  {
    auto violations = validate(s);
    if (!violations.empty())
      throw std::invalid_argument("encode_score: invalid score: " +
                                  violations.front().field + ": " +
                                  violations.front().message);
  }

  FrameSet f;
  f.length = s.total_frames;
  f.time_signatures = s.time_signatures;

  for (Part p : kAllParts) {
    auto& row = f.tokens[size_t(p)];
    if (s.has_voice(p)) {
      f.has_voice[size_t(p)] = true;
      detail::encode_voice(s.voice(p), s.total_frames, row);
    } else {
      row.assign(size_t(s.total_frames), vocab::kHold);
      if (s.total_frames > 0) row[0] = vocab::kRest;
    }
  }

  f.fermata.assign(size_t(s.total_frames), 0);
  for (int frame : s.fermata_frames)
    if (frame >= 0 && frame < s.total_frames) f.fermata[size_t(frame)] = 1;

  auto measures = measure_map(s.time_signatures, s.total_frames);
  auto classes = beat_classes(measures, s.total_frames);
  f.beat.assign(classes.begin(), classes.end());

  f.chord.assign(size_t(s.total_frames), Chromagram{});
  size_t ci = 0;
  Chromagram active;  // empty before the first annotation
  for (int t = 0; t < s.total_frames; ++t) {
    while (ci < s.chords.size() && s.chords[ci].onset <= t)
      active = s.chords[ci++].pitch_classes;
    f.chord[size_t(t)] = active;
  }
  return f;
}

struct DecodeResult {
  Score score;
  int coercion_warnings = 0;  // HOLD tokens with no preceding onset
};

/// Frame sequences -> Score. Exact inverse of encode_score on its image;
/// a leading HOLD is coerced to a rest and counted as a warning.
inline DecodeResult decode_frames(const FrameSet& f) {
  DecodeResult result;
  Score& s = result.score;
  s.total_frames = f.length;
  s.time_signatures = f.time_signatures;

  for (Part p : kAllParts) {
    if (!f.has_voice[size_t(p)]) continue;
    const auto& row = f.tokens[size_t(p)];
    Voice& v = s.set_voice(p);
    NoteEvent current;
    bool open = false;
    for (int t = 0; t < f.length; ++t) {
      uint16_t token = row[size_t(t)];
      if (!vocab::is_valid(token))
        throw std::invalid_argument("decode_frames: token out of vocabulary");
      if (token == vocab::kHold) {
        if (!open) {
          ++result.coercion_warnings;
          current = NoteEvent{t, 1, std::nullopt};
          open = true;
        } else {
          ++current.duration;
        }
        continue;
      }
      if (open) v.events.push_back(current);
      current = NoteEvent{
          t, 1,
          token == vocab::kRest ? std::nullopt : std::optional<Pitch>(Pitch{int(token)})};
      open = true;
    }
    if (open) v.events.push_back(current);
  }

  for (int t = 0; t < f.length; ++t)
    if (f.fermata[size_t(t)]) s.fermata_frames.insert(t);

  Chromagram active;
  for (int t = 0; t < f.length; ++t) {
    const Chromagram& c = f.chord[size_t(t)];
    if (!c.empty() && c != active) {
      s.chords.push_back(ChordAnnotation{t, c, std::string{}});
      active = c;
    }
  }
  return result;
}

struct AblationSet {
  bool chord = false;
  bool beat = false;
};

/// Replace dropped condition sequences with neutral constants.
inline FrameSet ablate(FrameSet f, AblationSet drop) {
  if (drop.chord)
    for (auto& c : f.chord) c = Chromagram{};
  if (drop.beat)
    for (auto& b : f.beat) b = 0;
  return f;
}

}  // namespace kantor
