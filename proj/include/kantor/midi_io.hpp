#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "kantor/beat.hpp"
#include "kantor/score.hpp"

namespace kantor {

/// Standard MIDI file export: type 1, 480 ticks per quarter (one frame =
/// 120 ticks), fixed tempo, one track per present voice. Fermatas become
/// text meta-events on the first track; durations are not stretched.
namespace smf {

inline constexpr int kTicksPerQuarter = 480;
inline constexpr int kTicksPerFrame = kTicksPerQuarter / kFramesPerQuarter;
inline constexpr int kDefaultBpm = 72;
inline constexpr uint8_t kVelocity = 80;

namespace detail {

inline void put_u16(std::string& out, uint16_t v) {
  out.push_back(char(v >> 8));
  out.push_back(char(v & 0xff));
}

inline void put_u32(std::string& out, uint32_t v) {
  out.push_back(char(v >> 24));
  out.push_back(char((v >> 16) & 0xff));
  out.push_back(char((v >> 8) & 0xff));
  out.push_back(char(v & 0xff));
}

inline void put_vlq(std::string& out, uint32_t v) {
  char bytes[4];
  int n = 0;
  bytes[n++] = char(v & 0x7f);
  while (v >>= 7) bytes[n++] = char((v & 0x7f) | 0x80);
  while (n--) out.push_back(bytes[n]);
}

struct Event {
  int tick = 0;
  int order = 0;  // stable sort key within a tick
  std::string bytes;
};

inline std::string render_track(std::vector<Event> events, int end_tick) {
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) {
                     return a.tick != b.tick ? a.tick < b.tick
                                             : a.order < b.order;
                   });
  std::string data;
  int cursor = 0;
  for (const Event& e : events) {
    put_vlq(data, uint32_t(e.tick - cursor));
    data += e.bytes;
    cursor = e.tick;
  }
  put_vlq(data, uint32_t(end_tick - cursor));
  data += std::string("\xff\x2f\x00", 3);

  std::string chunk = "MTrk";
  put_u32(chunk, uint32_t(data.size()));
  return chunk + data;
}

inline int log2_exact(int v) {
  int l = 0;
  while ((1 << l) < v) ++l;
  return l;
}

}  // namespace detail

inline std::string write_bytes(const Score& s, int bpm = kDefaultBpm) {
  std::vector<Part> present;
  for (Part p : kAllParts)
    if (s.has_voice(p)) present.push_back(p);
  if (present.empty())
    throw std::invalid_argument("midi export: score has no voices");

  const int end_tick = s.total_frames * kTicksPerFrame;
  std::string out = "MThd";
  detail::put_u32(out, 6);
  detail::put_u16(out, 1);
  detail::put_u16(out, uint16_t(present.size()));
  detail::put_u16(out, kTicksPerQuarter);

  bool first = true;
  for (Part p : present) {
    std::vector<detail::Event> events;
    if (first) {
      uint32_t usec_per_quarter = uint32_t(60000000 / bpm);
      std::string tempo("\xff\x51\x03", 3);
      tempo.push_back(char((usec_per_quarter >> 16) & 0xff));
      tempo.push_back(char((usec_per_quarter >> 8) & 0xff));
      tempo.push_back(char(usec_per_quarter & 0xff));
      events.push_back({0, 0, tempo});

      auto measures = measure_map(s.time_signatures, s.total_frames);
      size_t ts_idx = 0;
      int measure_index = 0;
      for (const Measure& m : measures) {
        if (ts_idx < s.time_signatures.size() &&
            s.time_signatures[ts_idx].at_measure == measure_index) {
          const auto& sig = s.time_signatures[ts_idx++];
          std::string meta("\xff\x58\x04", 3);
          meta.push_back(char(sig.numerator));
          meta.push_back(char(detail::log2_exact(sig.denominator)));
          meta.push_back(char(24));
          meta.push_back(char(8));
          events.push_back({m.start * kTicksPerFrame, 1, meta});
        }
        ++measure_index;
      }

      int prev = -2;
      for (int frame : s.fermata_frames) {
        if (frame != prev + 1) {
          std::string meta("\xff\x01", 2);
          meta.push_back(char(7));
          meta += "fermata";
          events.push_back({frame * kTicksPerFrame, 2, meta});
        }
        prev = frame;
      }
      first = false;
    }

    uint8_t channel = uint8_t(p);
    for (const NoteEvent& e : s.voice(p).events) {
      if (e.is_rest()) continue;
      std::string on;
      on.push_back(char(0x90 | channel));
      on.push_back(char(e.pitch->midi));
      on.push_back(char(kVelocity));
      events.push_back({e.onset * kTicksPerFrame, 10, on});
      std::string off;
      off.push_back(char(0x80 | channel));
      off.push_back(char(e.pitch->midi));
      off.push_back(char(0));
      events.push_back({e.offset() * kTicksPerFrame, 5, off});
    }
    out += detail::render_track(std::move(events), end_tick);
  }
  return out;
}

inline void save(const Score& s, const std::string& path,
                 int bpm = kDefaultBpm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("midi export: cannot open " + path);
  std::string bytes = write_bytes(s, bpm);
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

}  // namespace smf
}  // namespace kantor
