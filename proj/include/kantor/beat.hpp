#pragma once

#include <utility>
#include <vector>

#include "kantor/score.hpp"

namespace kantor {

/// Measure view used for beat classification. `frames` is the actual span
/// (possibly truncated); `nominal_frames` the span its signature implies.
struct Measure {
  int start = 0;
  int frames = 0;
  int nominal_frames = 0;
  int numerator = 4;
  int denominator = 4;
  bool pickup = false;  // short declared first measure; strengths right-align
};

inline std::vector<Measure> measure_map(
    const std::vector<TimeSignatureEvent>& ts, int total_frames) {
  if (ts.empty())
    throw std::invalid_argument("measure_map: empty time-signature list");
  std::vector<Measure> out;
  size_t ts_idx = 0;
  int frame = 0;
  for (int measure = 0; frame < total_frames; ++measure) {
    while (ts_idx + 1 < ts.size() && ts[ts_idx + 1].at_measure <= measure)
      ++ts_idx;
    const auto& sig = ts[ts_idx];
    Measure m;
    m.start = frame;
    m.nominal_frames = sig.frames_per_measure();
    m.frames = std::min(m.nominal_frames, total_frames - frame);
    m.numerator = sig.numerator;
    m.denominator = sig.denominator;
    out.push_back(m);
    frame += m.frames;
  }
  // A declared short first measure is an anacrusis: classify its frames
  // right-aligned against the following full measure.
  if (out.size() >= 2 && out[0].nominal_frames < out[1].nominal_frames) {
    out[0].pickup = true;
    out[0].numerator = out[1].numerator;
    out[0].denominator = out[1].denominator;
  }
  return out;
}

namespace detail {

// Recursive halving: strength 1.0 at the span start, descending by depth.
inline void halve_strengths(std::vector<double>& s, int lo, int hi,
                            double strength) {
  if (hi - lo < 2 || strength < 0.25) return;
  int mid = lo + (hi - lo) / 2;
  s[size_t(mid)] = strength / 2;
  halve_strengths(s, lo, mid, strength / 2);
  halve_strengths(s, mid, hi, strength / 2);
}

/// Metrical strength per frame offset of one nominal measure.
/// Table-driven duple/triple/compound division for the common chorale
/// signatures; generic halving for anything else.
inline std::vector<double> measure_strengths(int num, int den,
                                             int nominal_frames) {
  std::vector<double> s(size_t(nominal_frames), 0.0);
  if (nominal_frames == 0) return s;
  s[0] = 1.0;
  int unit = kFramesPerWhole / den;  // frames per denominator note

  auto subdivide_beat = [&](int beat_start, int beat_len) {
    // Halve within one beat: eighth level 0.25, finer below threshold.
    halve_strengths(s, beat_start, beat_start + beat_len, 0.5);
  };

  if (num == 3 && den == 4) {
    // Ternary measure: beats at 0.5, eighth offbeats at 0.25.
    for (int b = 1; b < 3; ++b) s[size_t(b * unit)] = 0.5;
    for (int b = 0; b < 3; ++b) subdivide_beat(b * unit, unit);
    return s;
  }
  if ((num == 6 || num == 12) && den == 8) {
    // Compound: duple recursion over dotted-quarter beats, then each beat
    // splits in three. 6/8 keeps its triplet eighths at 0.25; in 12/8 they
    // land a level deeper and class as non-beats.
    int beat_len = 3 * unit;
    int beats = num / 3;  // 2 or 4
    if (beats == 2) {
      s[size_t(beat_len)] = 0.5;
      for (int b = 0; b < 2; ++b)
        for (int k = 1; k < 3; ++k) s[size_t(b * beat_len + k * unit)] = 0.25;
    } else {
      s[size_t(2 * beat_len)] = 0.5;
      s[size_t(beat_len)] = s[size_t(3 * beat_len)] = 0.25;
    }
    return s;
  }
  if (num % 2 == 0) {
    // Duple: recursive halving of the whole measure.
    halve_strengths(s, 0, nominal_frames, 1.0);
    return s;
  }
  // Odd simple meters: beats at 0.5, then halving inside each beat.
  for (int b = 1; b < num; ++b) s[size_t(b * unit)] = 0.5;
  for (int b = 0; b < num; ++b) subdivide_beat(b * unit, unit);
  return s;
}

inline int strength_to_class(double strength) {
  if (strength >= 1.0) return 3;
  if (strength >= 0.5) return 2;
  if (strength >= 0.25) return 1;
  return 0;
}

}  // namespace detail

/// 4-level beat class of a frame: 3 strong, 2 medium, 1 weak, 0 non-beat.
inline int beat_class(int frame, const std::vector<Measure>& measures) {
  for (const Measure& m : measures) {
    if (frame < m.start || frame >= m.start + m.frames) continue;
    int offset = frame - m.start;
    int nominal = m.pickup ? m.numerator * (kFramesPerWhole / m.denominator)
                           : m.nominal_frames;
    if (m.pickup) offset += nominal - m.frames;  // right-align anacrusis
    auto strengths =
        detail::measure_strengths(m.numerator, m.denominator, nominal);
    if (offset < 0 || offset >= int(strengths.size())) return 0;
    return detail::strength_to_class(strengths[size_t(offset)]);
  }
  return 0;
}

/// Beat class for every frame in [0, total_frames).
inline std::vector<int> beat_classes(const std::vector<Measure>& measures,
                                     int total_frames) {
  std::vector<int> out(size_t(total_frames), 0);
  for (const Measure& m : measures) {
    int nominal = m.pickup ? m.numerator * (kFramesPerWhole / m.denominator)
                           : m.nominal_frames;
    auto strengths =
        detail::measure_strengths(m.numerator, m.denominator, nominal);
    int shift = m.pickup ? nominal - m.frames : 0;
    for (int off = 0; off < m.frames; ++off) {
      int frame = m.start + off;
      if (frame >= total_frames) break;
      int idx = off + shift;
      out[size_t(frame)] =
          idx < int(strengths.size())
              ? detail::strength_to_class(strengths[size_t(idx)])
              : 0;
    }
  }
  return out;
}

}  // namespace kantor
