#include "metastab/step_function.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "metastab/errors.hpp"
#include "metastab/potential.hpp"

namespace metastab {

std::size_t StepFunction::plateau_at(double x) const {
  const auto it = std::upper_bound(jumps.begin(), jumps.end(), x);
  return plateaus.at(static_cast<std::size_t>(std::distance(jumps.begin(), it)));
}

const Vec& StepFunction::value_at(const PotentialSpec& potential, double x) const {
  return potential.zeros().at(plateau_at(x));
}

void StepFunction::validate(const PotentialSpec& potential) const {
  if (!(b > a)) throw ConfigError("step function: empty interval");
  if (plateaus.size() != jumps.size() + 1) throw ConfigError("step function: need N+1 plateau values");
  for (std::size_t p : plateaus)
    if (p >= potential.well_count()) throw ConfigError("step function: plateau index outside zero list");
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    if (!(jumps[i] > a && jumps[i] < b)) throw ConfigError("step function: jump outside (a, b)");
    if (i > 0 && !(jumps[i] > jumps[i - 1])) throw ConfigError("step function: jumps not increasing");
    if (plateaus[i] == plateaus[i + 1]) throw ConfigError("step function: adjacent plateaus are equal");
  }
  if (!jumps.empty()) {
    if (!(r > 0.0)) throw ConfigError("step function: r must be positive");
    if (jumps.front() - r < a || jumps.back() + r > b)
      throw ConfigError("step function: ball B(gamma, r) leaves [a, b]");
    for (std::size_t i = 1; i < jumps.size(); ++i)
      if (jumps[i] - jumps[i - 1] < 2.0 * r) throw ConfigError("step function: balls B(gamma, r) overlap");
  }
}

namespace {
double parse_double(std::string_view s) {
  double v = 0.0;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError("cannot parse number '" + std::string(s) + "'");
  return v;
}
std::size_t parse_index(std::string_view s) {
  const double v = parse_double(s);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
    throw ConfigError("cannot parse well index '" + std::string(s) + "'");
  return static_cast<std::size_t>(v);
}
}  // namespace

StepFunction StepFunction::parse(const std::string& text, double a, double b, double r,
                                 std::size_t constant_well) {
  StepFunction v;
  v.a = a;
  v.b = b;
  v.r = r;
  std::string_view rest = text;
  if (rest.find_first_not_of(' ') == std::string_view::npos) {
    v.plateaus = {constant_well};
    return v;
  }
  struct Jump {
    double x;
    std::size_t from, to;
  };
  std::vector<Jump> items;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto colon = item.find(':');
    const auto gt = item.find('>');
    if (colon == std::string_view::npos || gt == std::string_view::npos || gt < colon)
      throw ConfigError("jump spec must look like 'x:i>j', got '" + std::string(item) + "'");
    items.push_back({parse_double(item.substr(0, colon)), parse_index(item.substr(colon + 1, gt - colon - 1)),
                     parse_index(item.substr(gt + 1))});
  }
  std::sort(items.begin(), items.end(), [](const Jump& l, const Jump& r2) { return l.x < r2.x; });
  v.plateaus.push_back(items.front().from);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].from != v.plateaus.back())
      throw ConfigError("jump spec: plateau values of consecutive jumps do not chain");
    v.jumps.push_back(items[i].x);
    v.plateaus.push_back(items[i].to);
  }
  return v;
}

std::string StepFunction::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < jumps.size(); ++i)
    os << (i ? "," : "") << jumps[i] << ':' << plateaus[i] << '>' << plateaus[i + 1];
  return os.str();
}

}  // namespace metastab
