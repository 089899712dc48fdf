#pragma once

#include <bitset>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "kantor/chroma.hpp"
#include "kantor/distribution.hpp"
#include "kantor/rng.hpp"
#include "kantor/vocabulary.hpp"

namespace kantor {

/// The attribute-related token subset that the gamma transform scales.
struct AttributeSet {
  std::bitset<vocab::kSize> mask;

  bool contains(uint16_t token) const { return mask[token]; }
  void add(uint16_t token) { mask.set(token); }
  size_t size() const { return mask.count(); }
};

/// Harmonicity h in [0,1]; control strength is its mirror, 1-h. h = 0.5 is
/// neutral, 1.0 admits only attribute tokens, 0.0 blocks them.
struct HarmonicityParam {
  double h = 0.5;

  double strength() const { return 1.0 - h; }
  bool valid() const { return h >= 0.0 && h <= 1.0; }
};

enum class AttributePolicy {
  Literal,      // chord-tone pitch tokens only; REST/HOLD never attribute
  HoldInherit,  // HOLD joins the set when the held pitch is a chord tone
};

/// Chord tones of `chroma` as vocabulary tokens. Under HoldInherit the HOLD
/// token is classified by the most recent sounding token of the voice being
/// sampled (pass it via `last_sounding`).
inline AttributeSet attribute_tokens(
    const Chromagram& chroma, AttributePolicy policy = AttributePolicy::Literal,
    std::optional<uint16_t> last_sounding = std::nullopt) {
  AttributeSet a;
  if (chroma.empty()) return a;
  for (uint16_t tok = 0; tok < 128; ++tok)
    if (chroma.contains(pitch_class(int(tok)))) a.add(tok);
  if (policy == AttributePolicy::HoldInherit && last_sounding &&
      vocab::is_pitch(*last_sounding) &&
      chroma.contains(pitch_class(int(*last_sounding))))
    a.add(vocab::kHold);
  return a;
}

/// Scale the total probability mass of attribute tokens to mass^tan(pi*(1-h)/2),
/// renormalizing the complement so the result stays a distribution. Ratios
/// inside each side are preserved. Degenerate masses (0 or 1) pass through.
inline Distribution gamma_transform(const Distribution& d,
                                    const AttributeSet& attr,
                                    HarmonicityParam h) {
  if (!h.valid())
    throw std::domain_error("gamma_transform: h outside [0,1]");
  if (!d.is_normalized())
    throw std::domain_error("gamma_transform: input not normalized");

  double mass_attr = 0.0, mass_rest = 0.0;
  for (int t = 0; t < vocab::kSize; ++t)
    (attr.contains(uint16_t(t)) ? mass_attr : mass_rest) += d[size_t(t)];
  if (mass_attr == 0.0 || mass_rest == 0.0) return d;

  Distribution out = d;
  if (h.h == 1.0) {
    // Explicit limit: all mass onto the attribute side.
    for (int t = 0; t < vocab::kSize; ++t)
      out[size_t(t)] =
          attr.contains(uint16_t(t)) ? d[size_t(t)] / mass_attr : 0.0;
    return out;
  }
  if (h.h == 0.0) {
    // Explicit limit: attribute side blocked.
    double scale = 1.0 + mass_attr / mass_rest;
    for (int t = 0; t < vocab::kSize; ++t)
      out[size_t(t)] =
          attr.contains(uint16_t(t)) ? 0.0 : d[size_t(t)] * scale;
    return out;
  }

  double exponent = std::tan(std::numbers::pi * h.strength() / 2.0);
  double mass_out = std::pow(mass_attr, exponent);
  double attr_scale = mass_out / mass_attr;
  double rest_scale = 1.0 + (mass_attr - mass_out) / mass_rest;
  for (int t = 0; t < vocab::kSize; ++t)
    out[size_t(t)] = d[size_t(t)] * (attr.contains(uint16_t(t)) ? attr_scale
                                                                : rest_scale);
  return out;
}

enum class SamplePolicy { Multinomial, Greedy };

/// Draw a token from a distribution. Greedy breaks ties toward the lowest id.
inline uint16_t sample_token(const Distribution& d, Rng& rng,
                             SamplePolicy policy) {
  double total = d.sum();
  if (total <= 0.0)
    throw std::domain_error("sample_token: all-zero distribution");

  if (policy == SamplePolicy::Greedy) {
    int best = 0;
    for (int t = 1; t < vocab::kSize; ++t)
      if (d[size_t(t)] > d[size_t(best)]) best = t;
    return uint16_t(best);
  }

  double u = rng.next_double() * total;
  double acc = 0.0;
  for (int t = 0; t < vocab::kSize; ++t) {
    acc += d[size_t(t)];
    if (u < acc) return uint16_t(t);
  }
  // Rounding pushed u past the last positive entry.
  for (int t = vocab::kSize - 1; t >= 0; --t)
    if (d[size_t(t)] > 0.0) return uint16_t(t);
  return 0;
}

}  // namespace kantor
