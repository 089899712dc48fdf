#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "kantor/pitch.hpp"

namespace kantor {

/// 12-bit multi-hot pitch-class set (chromagram). Bit i = pitch class i active.
class Chromagram {
 public:
  Chromagram() = default;
  explicit Chromagram(uint16_t bits) : bits_(bits & 0x0fff) {}
  Chromagram(std::initializer_list<int> pcs) {
    for (int pc : pcs) set(pc);
  }

  static Chromagram from_pitch_classes(const std::vector<int>& pcs) {
    Chromagram c;
    for (int pc : pcs) c.set(pc);
    return c;
  }

  void set(int pc) { bits_ |= uint16_t(1u << (((pc % 12) + 12) % 12)); }
  void clear(int pc) { bits_ &= uint16_t(~(1u << (((pc % 12) + 12) % 12))); }
  bool contains(int pc) const {
    return (bits_ >> (((pc % 12) + 12) % 12)) & 1u;
  }

  bool empty() const { return bits_ == 0; }
  int count() const { return __builtin_popcount(bits_); }
  uint16_t bits() const { return bits_; }

  std::vector<int> pitch_classes() const {
    std::vector<int> out;
    for (int pc = 0; pc < 12; ++pc)
      if (contains(pc)) out.push_back(pc);
    return out;
  }

  Chromagram transposed(int semitones) const {
    Chromagram out;
    for (int pc = 0; pc < 12; ++pc)
      if (contains(pc)) out.set(pc + semitones);
    return out;
  }

  friend bool operator==(const Chromagram&, const Chromagram&) = default;

 private:
  uint16_t bits_ = 0;
};

}  // namespace kantor
