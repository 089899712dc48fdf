#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "kantor/chroma.hpp"
#include "kantor/score.hpp"

namespace kantor {

/// Evaluation view of one sounding frame: the pitch heard in a voice joined
/// with the chord active under it. HOLD frames inherit the held pitch; rest
/// frames produce no NoteFrame.
struct NoteFrame {
  Part part = Part::Alto;
  int frame = 0;
  int midi = 60;
  Chromagram chroma;
  bool is_onset = false;
};

/// Flatten one voice of a score into NoteFrames against its chord track.
inline std::vector<NoteFrame> note_frames(const Score& s, Part part) {
  std::vector<NoteFrame> out;
  if (!s.has_voice(part)) return out;
  for (const NoteEvent& e : s.voice(part).events) {
    if (e.is_rest()) continue;
    for (int t = e.onset; t < e.offset() && t < s.total_frames; ++t) {
      Chromagram active;
      for (const ChordAnnotation& c : s.chords) {
        if (c.onset > t) break;
        active = c.pitch_classes;
      }
      out.push_back(NoteFrame{part, t, e.pitch->midi, active, t == e.onset});
    }
  }
  return out;
}

/// Chord-tone to non-chord-tone ratio over note onsets:
/// (n_c + n_p) / (n_c + n_n), where n_p counts non-chord onsets resolving
/// within two semitones at the voice's next onset. `literal_gloss` switches
/// to the bare n_c / n_n quotient (undefined when n_n is zero).
inline double ctnctr(const std::vector<NoteFrame>& notes,
                     bool literal_gloss = false) {
  std::vector<const NoteFrame*> onsets;
  for (const NoteFrame& n : notes)
    if (n.is_onset && !n.chroma.empty()) onsets.push_back(&n);
  if (onsets.empty())
    throw std::invalid_argument("ctnctr: no sounding onsets");

  int n_c = 0, n_n = 0, n_p = 0;
  for (size_t i = 0; i < onsets.size(); ++i) {
    const NoteFrame& n = *onsets[i];
    if (n.chroma.contains(pitch_class(n.midi))) {
      ++n_c;
      continue;
    }
    ++n_n;
    if (i + 1 < onsets.size() &&
        std::abs(onsets[i + 1]->midi - n.midi) <= 2)
      ++n_p;
  }
  if (literal_gloss) {
    if (n_n == 0)
      throw std::domain_error("ctnctr: literal n_c/n_n undefined at n_n=0");
    return double(n_c) / double(n_n);
  }
  return double(n_c + n_p) / double(n_c + n_n);
}

/// Pitch consonance score in [-1,1]: interval table over every
/// (sounding frame, chord tone) pair. Unison/3rds/5th/6ths score 1,
/// the perfect fourth 0, the rest -1.
inline double pcs(const std::vector<NoteFrame>& notes) {
  double total = 0.0;
  long pairs = 0;
  for (const NoteFrame& n : notes) {
    if (n.chroma.empty()) continue;
    for (int chord_pc : n.chroma.pitch_classes()) {
      int d = ((pitch_class(n.midi) - chord_pc) % 12 + 12) % 12;
      double score;
      switch (d) {
        case 0: case 3: case 4: case 7: case 8: case 9: score = 1.0; break;
        case 5: score = 0.0; break;
        default: score = -1.0; break;
      }
      total += score;
      ++pairs;
    }
  }
  if (pairs == 0)
    throw std::invalid_argument("pcs: no sounding frames with chords");
  return total / double(pairs);
}

using TonalCentroid = std::array<double, 6>;

/// 6-D projection of a chroma vector onto the fifths/minor-third/major-third
/// circles, normalized by the L1 mass of the chroma.
inline TonalCentroid tonal_centroid(const Chromagram& c) {
  if (c.empty())
    throw std::invalid_argument("tonal_centroid: empty chroma");
  constexpr double r1 = 1.0, r2 = 1.0, r3 = 0.5;
  TonalCentroid acc{};
  int n = 0;
  for (int pc = 0; pc < 12; ++pc) {
    if (!c.contains(pc)) continue;
    double l = double(pc);
    acc[0] += r1 * std::sin(7.0 * std::numbers::pi * l / 6.0);
    acc[1] += r1 * std::cos(7.0 * std::numbers::pi * l / 6.0);
    acc[2] += r2 * std::sin(3.0 * std::numbers::pi * l / 2.0);
    acc[3] += r2 * std::cos(3.0 * std::numbers::pi * l / 2.0);
    acc[4] += r3 * std::sin(2.0 * std::numbers::pi * l / 3.0);
    acc[5] += r3 * std::cos(2.0 * std::numbers::pi * l / 3.0);
    ++n;
  }
  for (double& x : acc) x /= double(n);
  return acc;
}

inline TonalCentroid tonal_centroid(int pitch_class_index) {
  Chromagram c;
  c.set(pitch_class_index);
  return tonal_centroid(c);
}

inline double centroid_distance(const TonalCentroid& a,
                                const TonalCentroid& b) {
  double sq = 0.0;
  for (int i = 0; i < 6; ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sq);
}

/// Melody-chord tonal distance: duration-weighted mean centroid distance
/// between each sounding frame's pitch class and its active chord.
inline double mctd(const std::vector<NoteFrame>& notes) {
  double total = 0.0;
  long frames = 0;
  for (const NoteFrame& n : notes) {
    if (n.chroma.empty()) continue;
    total += centroid_distance(tonal_centroid(pitch_class(n.midi)),
                               tonal_centroid(n.chroma));
    ++frames;
  }
  if (frames == 0)
    throw std::invalid_argument("mctd: no sounding frames with chords");
  return total / double(frames);
}

/// Product-moment correlation.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("pearson: need >=2 paired points");
  size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(n);
  my /= double(n);
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    cov += (xs[i] - mx) * (ys[i] - my);
    vx += (xs[i] - mx) * (xs[i] - mx);
    vy += (ys[i] - my) * (ys[i] - my);
  }
  if (vx == 0.0 || vy == 0.0)
    throw std::domain_error("pearson: degenerate variance");
  return cov / std::sqrt(vx * vy);
}

struct VoiceMetrics {
  double ctnctr = 0.0;
  double pcs = 0.0;
  double mctd = 0.0;
};

struct PieceMetrics {
  std::array<std::optional<VoiceMetrics>, 4> per_part;  // indexed by Part
  VoiceMetrics mean;                                    // macro over A/T/B
};

/// Per-voice metrics for the generated parts, macro-averaged A then T then B.
inline PieceMetrics evaluate_piece(const Score& s) {
  PieceMetrics out;
  int counted = 0;
  for (Part p : {Part::Alto, Part::Tenor, Part::Bass}) {
    if (!s.has_voice(p)) continue;
    auto notes = note_frames(s, p);
    VoiceMetrics m{ctnctr(notes), pcs(notes), mctd(notes)};
    out.per_part[size_t(p)] = m;
    out.mean.ctnctr += m.ctnctr;
    out.mean.pcs += m.pcs;
    out.mean.mctd += m.mctd;
    ++counted;
  }
  if (counted == 0)
    throw std::invalid_argument("evaluate_piece: no generated voices");
  out.mean.ctnctr /= counted;
  out.mean.pcs /= counted;
  out.mean.mctd /= counted;
  return out;
}

}  // namespace kantor
