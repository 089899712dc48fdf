#pragma once

#include <cstdint>

namespace kantor::vocab {

/// Shared token space for all four voices: 128 MIDI pitches, rest, hold.
inline constexpr int kSize = 130;
inline constexpr uint16_t kRest = 128;
inline constexpr uint16_t kHold = 129;

inline constexpr bool is_pitch(uint16_t token) { return token < 128; }
inline constexpr bool is_valid(uint16_t token) { return token < kSize; }

}  // namespace kantor::vocab
