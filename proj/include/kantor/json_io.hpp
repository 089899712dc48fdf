#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "kantor/score.hpp"

namespace kantor {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A score plus the optional sidecar metadata carried by generated files.
struct ScoreFile {
  Score score;
  std::optional<double> meta_h;
  std::optional<uint64_t> meta_seed;
};

inline constexpr int kScoreFormatVersion = 1;

namespace detail {

inline nlohmann::json score_to_json(const ScoreFile& file) {
  const Score& s = file.score;
  nlohmann::json j;
  j["format_version"] = kScoreFormatVersion;
  j["divisions"] = kFramesPerQuarter;

  nlohmann::json ts = nlohmann::json::array();
  for (const auto& e : s.time_signatures)
    ts.push_back({{"measure", e.at_measure},
                  {"num", e.numerator},
                  {"den", e.denominator}});
  j["time_signatures"] = ts;

  nlohmann::json voices = nlohmann::json::object();
  for (Part p : kAllParts) {
    if (!s.has_voice(p)) continue;
    nlohmann::json events = nlohmann::json::array();
    for (const NoteEvent& e : s.voice(p).events) {
      nlohmann::json ev{{"onset", e.onset}, {"duration", e.duration}};
      if (e.pitch)
        ev["pitch"] = e.pitch->midi;
      else
        ev["pitch"] = nullptr;
      events.push_back(ev);
    }
    voices[part_name(p)] = events;
  }
  j["voices"] = voices;

  j["fermata_frames"] =
      std::vector<int>(s.fermata_frames.begin(), s.fermata_frames.end());

  nlohmann::json chords = nlohmann::json::array();
  for (const ChordAnnotation& c : s.chords) {
    nlohmann::json jc{{"onset", c.onset},
                      {"pitch_classes", c.pitch_classes.pitch_classes()}};
    if (!c.symbol.empty()) jc["symbol"] = c.symbol;
    chords.push_back(jc);
  }
  j["chords"] = chords;

  if (file.meta_h || file.meta_seed) {
    nlohmann::json meta = nlohmann::json::object();
    if (file.meta_h) meta["h"] = *file.meta_h;
    if (file.meta_seed) meta["seed"] = *file.meta_seed;
    j["meta"] = meta;
  }
  return j;
}

inline int require_int(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw DataError(std::string("score json: missing integer field '") + key +
                    "'");
  return j[key].get<int>();
}

}  // namespace detail

inline std::string write_score_json(const ScoreFile& file) {
  return detail::score_to_json(file).dump(2) + "\n";
}

inline void save_score(const ScoreFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << write_score_json(file);
}

/// Parse the canonical score format. Reports json syntax errors with byte
/// positions and schema violations by field name.
inline ScoreFile read_score_json(const std::string& text,
                                 const std::string& origin = "<input>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    std::ostringstream msg;
    msg << origin << ": parse error at byte " << ex.byte << ": " << ex.what();
    throw DataError(msg.str());
  }

  ScoreFile file;
  Score& s = file.score;
  if (detail::require_int(j, "format_version") != kScoreFormatVersion)
    throw DataError(origin + ": unsupported format_version");
  if (detail::require_int(j, "divisions") != kFramesPerQuarter)
    throw DataError(origin + ": divisions must be 4 (sixteenth grid)");

  if (!j.contains("time_signatures") || !j["time_signatures"].is_array())
    throw DataError(origin + ": time_signatures array required");
  for (const auto& e : j["time_signatures"])
    s.time_signatures.push_back(TimeSignatureEvent{
        detail::require_int(e, "measure"), detail::require_int(e, "num"),
        detail::require_int(e, "den")});

  if (!j.contains("voices") || !j["voices"].is_object())
    throw DataError(origin + ": voices object required");
  int max_frame = 0;
  for (Part p : kAllParts) {
    const char* name = part_name(p);
    if (!j["voices"].contains(name)) continue;
    Voice& v = s.set_voice(p);
    for (const auto& ev : j["voices"][name]) {
      NoteEvent e;
      e.onset = detail::require_int(ev, "onset");
      e.duration = detail::require_int(ev, "duration");
      if (!ev.contains("pitch"))
        throw DataError(origin + ": note event lacks pitch (null encodes rest)");
      if (!ev["pitch"].is_null()) e.pitch = Pitch{ev["pitch"].get<int>()};
      v.events.push_back(e);
      max_frame = std::max(max_frame, e.offset());
    }
  }

  if (j.contains("fermata_frames"))
    for (const auto& f : j["fermata_frames"]) s.fermata_frames.insert(f.get<int>());

  if (j.contains("chords"))
    for (const auto& jc : j["chords"]) {
      ChordAnnotation c;
      c.onset = detail::require_int(jc, "onset");
      if (!jc.contains("pitch_classes") || !jc["pitch_classes"].is_array())
        throw DataError(origin + ": chord lacks pitch_classes");
      for (const auto& pc : jc["pitch_classes"]) c.pitch_classes.set(pc.get<int>());
      if (jc.contains("symbol")) c.symbol = jc["symbol"].get<std::string>();
      s.chords.push_back(c);
    }

  if (j.contains("total_frames"))
    s.total_frames = j["total_frames"].get<int>();
  else
    s.total_frames = max_frame;

  if (j.contains("meta") && j["meta"].is_object()) {
    const auto& meta = j["meta"];
    if (meta.contains("h")) file.meta_h = meta["h"].get<double>();
    if (meta.contains("seed")) file.meta_seed = meta["seed"].get<uint64_t>();
  }
  return file;
}

inline ScoreFile load_score(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return read_score_json(buf.str(), path);
}

}  // namespace kantor
