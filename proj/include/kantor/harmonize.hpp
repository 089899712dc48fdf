#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kantor/frameset.hpp"
#include "kantor/gamma.hpp"
#include "kantor/metrics.hpp"
#include "kantor/model.hpp"

namespace kantor {

struct HarmonizeOptions {
  HarmonicityParam h{0.5};
  SamplePolicy draw = SamplePolicy::Multinomial;
  AttributePolicy attr = AttributePolicy::Literal;
  uint64_t seed = 0;
  bool range_mask = false;  // clamp A/T/B to conventional vocal ranges
};

struct HarmonizeResult {
  Score score;
  std::vector<std::string> warnings;
};

namespace detail {

// Conventional SATB ranges (MIDI), used only when range masking is on.
inline constexpr int kRangeLow[3] = {53, 47, 40};   // A, T, B
inline constexpr int kRangeHigh[3] = {79, 72, 64};

inline void mask_and_renormalize(Distribution& d, int voice, bool mask_hold,
                                 bool range_mask) {
  if (mask_hold) d[vocab::kHold] = 0.0;
  if (range_mask)
    for (int tok = 0; tok < 128; ++tok)
      if (tok < kRangeLow[voice] || tok > kRangeHigh[voice])
        d[size_t(tok)] = 0.0;
  d.normalize();
}

}  // namespace detail

/// Generate alto/tenor/bass for a score carrying soprano (and normally a
/// chord track). Conditions pass through untouched; each head distribution is
/// gamma-transformed against the active chord before sampling.
inline HarmonizeResult harmonize(const Score& input, const SequenceModel& model,
                                 const HarmonizeOptions& opts) {
  if (!opts.h.valid())
    throw std::invalid_argument("harmonize: h outside [0,1]");
  if (!input.has_voice(Part::Soprano))
    throw std::invalid_argument("harmonize: input lacks a soprano");

  HarmonizeResult result;
  if (model.config().use_chord && input.chords.empty())
    throw std::invalid_argument(
        "harmonize: model was trained with chords but the input has none");
  if (!model.config().use_chord && !input.chords.empty())
    result.warnings.push_back(
        "model ignores chords (trained chord-free); gamma steering still "
        "applies");

  Score conditions = input;
  for (Part p : {Part::Alto, Part::Tenor, Part::Bass})
    conditions.voices[size_t(p)].reset();
  FrameSet frames = encode_score(conditions);

  auto enc = model.encode(frames);
  Rng rng(opts.seed);

  std::vector<std::array<uint16_t, 3>> generated;
  generated.reserve(size_t(frames.length));
  // Most recent sounding token per voice, for the hold-inherit policy.
  std::array<std::optional<uint16_t>, 3> last_sounding;

  std::array<uint16_t, 3> prev{kStartToken, kStartToken, kStartToken};
  for (int t = 0; t < frames.length; ++t) {
    if (t > 0) prev = generated.back();
    auto dists = model.predict_encoded(*enc, t, prev);
    std::array<uint16_t, 3> toks{};
    for (int v = 0; v < 3; ++v) {
      Distribution& d = dists[size_t(v)];
      detail::mask_and_renormalize(d, v, /*mask_hold=*/t == 0,
                                   opts.range_mask);
      AttributeSet attr = attribute_tokens(frames.chord[size_t(t)], opts.attr,
                                           last_sounding[size_t(v)]);
      d = gamma_transform(d, attr, opts.h);
      uint16_t tok = sample_token(d, rng, opts.draw);
      toks[size_t(v)] = tok;
      if (tok != vocab::kHold) last_sounding[size_t(v)] = tok;
    }
    generated.push_back(toks);
  }

  FrameSet out_frames = frames;
  for (int v = 0; v < 3; ++v) {
    auto& row = out_frames.tokens[size_t(v) + 1];
    for (int t = 0; t < frames.length; ++t)
      row[size_t(t)] = generated[size_t(t)][size_t(v)];
    out_frames.has_voice[size_t(v) + 1] = true;
  }

  DecodeResult decoded = decode_frames(out_frames);
  result.score = input;  // soprano, chords, fermatas byte-identical
  for (Part p : {Part::Alto, Part::Tenor, Part::Bass})
    result.score.voices[size_t(p)] = decoded.score.voices[size_t(p)];
  if (decoded.coercion_warnings > 0)
    result.warnings.push_back(std::to_string(decoded.coercion_warnings) +
                              " hold tokens coerced to rests");
  return result;
}

struct BatchRow {
  std::string piece_id;
  double h = 0.5;
  PieceMetrics metrics;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct BatchReport {
  std::vector<BatchRow> rows;
  VoiceMetrics mean;  // over successful rows
  int failures = 0;
};

/// Harmonize a list of pieces at one h, collecting per-piece metrics.
/// Per-piece failures are reported, not propagated.
inline BatchReport harmonize_batch(
    const std::vector<std::pair<std::string, Score>>& pieces,
    const SequenceModel& model, const HarmonizeOptions& base_opts,
    const std::vector<uint64_t>& seeds, std::vector<Score>* outputs = nullptr) {
  if (pieces.empty())
    throw std::invalid_argument("harmonize_batch: empty piece list");

  BatchReport report;
  int ok_count = 0;
  for (size_t i = 0; i < pieces.size(); ++i) {
    BatchRow row;
    row.piece_id = pieces[i].first;
    row.h = base_opts.h.h;
    try {
      HarmonizeOptions opts = base_opts;
      opts.seed = i < seeds.size() ? seeds[i] : base_opts.seed + i;
      HarmonizeResult res = harmonize(pieces[i].second, model, opts);
      row.metrics = evaluate_piece(res.score);
      if (outputs) outputs->push_back(res.score);
      report.mean.ctnctr += row.metrics.mean.ctnctr;
      report.mean.pcs += row.metrics.mean.pcs;
      report.mean.mctd += row.metrics.mean.mctd;
      ++ok_count;
    } catch (const std::exception& ex) {
      row.error = ex.what();
      ++report.failures;
      if (outputs) outputs->push_back(pieces[i].second);
    }
    report.rows.push_back(std::move(row));
  }
  if (ok_count > 0) {
    report.mean.ctnctr /= ok_count;
    report.mean.pcs /= ok_count;
    report.mean.mctd /= ok_count;
  }
  return report;
}

struct SweepReport {
  std::vector<BatchRow> rows;  // one per (piece, h)
  double r_ctnctr = 0.0;
  double r_pcs = 0.0;
  double r_mctd = 0.0;
};

/// Reharmonize the set at each h and correlate the per-piece mean metrics
/// against h.
inline SweepReport harmonicity_sweep(
    const std::vector<std::pair<std::string, Score>>& pieces,
    const SequenceModel& model, const std::vector<double>& hs,
    const HarmonizeOptions& base_opts) {
  if (hs.size() < 2)
    throw std::invalid_argument("harmonicity_sweep: need >=2 h values");

  SweepReport sweep;
  std::vector<double> xs, ct, pc, mc;
  for (double h : hs) {
    HarmonizeOptions opts = base_opts;
    opts.h = HarmonicityParam{h};
    BatchReport batch = harmonize_batch(pieces, model, opts, {});
    for (auto& row : batch.rows) {
      if (row.ok()) {
        xs.push_back(h);
        ct.push_back(row.metrics.mean.ctnctr);
        pc.push_back(row.metrics.mean.pcs);
        mc.push_back(row.metrics.mean.mctd);
      }
      sweep.rows.push_back(std::move(row));
    }
  }
  sweep.r_ctnctr = pearson(xs, ct);
  sweep.r_pcs = pearson(xs, pc);
  sweep.r_mctd = pearson(xs, mc);
  return sweep;
}

}  // namespace kantor
