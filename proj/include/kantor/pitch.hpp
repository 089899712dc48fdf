#pragma once

#include <array>
#include <string>

namespace kantor {

/// Sixteenth-note grid: 16 frames per whole note, 4 per quarter.
inline constexpr int kFramesPerWhole = 16;
inline constexpr int kFramesPerQuarter = 4;

enum class Part { Soprano = 0, Alto = 1, Tenor = 2, Bass = 3 };

inline constexpr std::array<Part, 4> kAllParts = {Part::Soprano, Part::Alto,
                                                  Part::Tenor, Part::Bass};

inline const char* part_name(Part p) {
  switch (p) {
    case Part::Soprano: return "soprano";
    case Part::Alto: return "alto";
    case Part::Tenor: return "tenor";
    case Part::Bass: return "bass";
  }
  return "?";
}

/// MIDI pitch, 0..127, middle C = 60.
struct Pitch {
  int midi = 60;
  friend bool operator==(const Pitch&, const Pitch&) = default;
};

inline int pitch_class(int midi) { return ((midi % 12) + 12) % 12; }
inline int pitch_class(Pitch p) { return pitch_class(p.midi); }

inline bool valid_midi(int midi) { return midi >= 0 && midi <= 127; }

inline const char* pitch_class_name(int pc) {
  static constexpr const char* names[12] = {"C",  "C#", "D",  "Eb", "E",  "F",
                                            "F#", "G",  "Ab", "A",  "Bb", "B"};
  return names[((pc % 12) + 12) % 12];
}

}  // namespace kantor
