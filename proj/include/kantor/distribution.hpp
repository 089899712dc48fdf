#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "kantor/vocabulary.hpp"

namespace kantor {

/// Probability vector over the 130-token vocabulary.
struct Distribution {
  std::array<double, vocab::kSize> p{};

  double& operator[](size_t i) { return p[i]; }
  double operator[](size_t i) const { return p[i]; }

  double sum() const {
    double s = 0.0;
    for (double x : p) s += x;
    return s;
  }

  bool is_normalized(double tol = 1e-6) const {
    for (double x : p)
      if (!(x >= 0.0) || !std::isfinite(x)) return false;
    return std::abs(sum() - 1.0) <= tol;
  }

  void normalize() {
    double s = sum();
    if (s <= 0.0)
      throw std::domain_error("Distribution::normalize: zero total mass");
    for (double& x : p) x /= s;
  }

  static Distribution uniform() {
    Distribution d;
    d.p.fill(1.0 / vocab::kSize);
    return d;
  }
};

}  // namespace kantor
