#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "metastab/linalg.hpp"

namespace metastab {

class PotentialSpec;

/// Piecewise-constant target v on [a, b] with N jumps gamma_1 < ... < gamma_N and plateau
/// values given as indices into the potential's zero list (N + 1 of them).
struct StepFunction {
  double a = 0.0;
  double b = 1.0;
  Vec jumps;
  std::vector<std::size_t> plateaus;
  double r = 0.0;

  std::size_t jump_count() const noexcept { return jumps.size(); }
  /// Plateau index at x (right-continuous at the jumps).
  std::size_t plateau_at(double x) const;
  /// Well value v(x).
  const Vec& value_at(const PotentialSpec& potential, double x) const;

  /// Throws ConfigError if: jumps are not strictly inside (a, b) and increasing; balls
  /// B(gamma_i, r) overlap or leave [a, b]; adjacent plateaus repeat; indices exceed the zero list.
  void validate(const PotentialSpec& potential) const;

  /// Parses "0.3:0>1,0.7:1>0" (location:from>to per jump). An empty string is a constant
  /// function whose value must then be given by `constant_well`.
  static StepFunction parse(const std::string& text, double a, double b, double r,
                            std::size_t constant_well = 0);
  std::string to_string() const;
};

}  // namespace metastab
