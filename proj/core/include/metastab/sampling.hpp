#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "metastab/linalg.hpp"

namespace metastab {

/// Axis-aligned box in R^m.
struct Box {
  Vec lower;
  Vec upper;

  std::size_t dimension() const noexcept { return lower.size(); }
  Vec center() const;
  bool contains(std::span<const double> p) const;
  /// Box grown by `fraction` of its extent on each side (at least `min_pad`).
  Box inflated(double fraction, double min_pad = 0.0) const;
  static Box bounding(const std::vector<Vec>& points);
};

/// Radical inverse of `index` in `base`; element of the van der Corput sequence.
double radical_inverse(std::uint64_t index, unsigned base);

/// Deterministic Halton point number `index` (1-based recommended) in a box.
Vec halton_point(const Box& box, std::uint64_t index);

/// Uniform double in [0,1) from the top 53 bits of a 64-bit word.
/// Used instead of std::uniform_real_distribution so draws are identical across standard libraries.
inline double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace metastab
