#include "metastab/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "metastab/errors.hpp"

namespace metastab {

namespace {
constexpr std::array<unsigned, 8> kPrimes{2, 3, 5, 7, 11, 13, 17, 19};
}

Vec Box::center() const {
  Vec c(lower.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (lower[i] + upper[i]);
  return c;
}

bool Box::contains(std::span<const double> p) const {
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (p[i] < lower[i] || p[i] > upper[i]) return false;
  return true;
}

Box Box::inflated(double fraction, double min_pad) const {
  Box b = *this;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    const double pad = std::max(fraction * (upper[i] - lower[i]), min_pad);
    b.lower[i] -= pad;
    b.upper[i] += pad;
  }
  return b;
}

Box Box::bounding(const std::vector<Vec>& points) {
  if (points.empty()) throw DomainError("Box::bounding: no points");
  Box b{points.front(), points.front()};
  for (const auto& p : points)
    for (std::size_t i = 0; i < p.size(); ++i) {
      b.lower[i] = std::min(b.lower[i], p[i]);
      b.upper[i] = std::max(b.upper[i], p[i]);
    }
  return b;
}

double radical_inverse(std::uint64_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

Vec halton_point(const Box& box, std::uint64_t index) {
  const std::size_t m = box.dimension();
  if (m > kPrimes.size()) throw DomainError("halton_point: dimension too large");
  Vec p(m);
  for (std::size_t i = 0; i < m; ++i)
    p[i] = box.lower[i] + radical_inverse(index, kPrimes[i]) * (box.upper[i] - box.lower[i]);
  return p;
}

}  // namespace metastab
