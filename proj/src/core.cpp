#include "arw/core.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace arw {

std::int32_t particle_count(SiteState state) { return state.particles(); }

bool state_leq(SiteState a, SiteState b) { return a.rank() <= b.rank(); }

Configuration::Configuration(Site lo, Site hi) : lo_(lo) {
  if (hi < lo) throw std::invalid_argument("configuration window must satisfy lo <= hi");
  states_.assign(static_cast<std::size_t>(hi - lo + 1), SiteState::empty());
}

Configuration::Configuration(Site lo, std::vector<SiteState> states) : lo_(lo), states_(std::move(states)) {
  if (states_.empty()) throw std::invalid_argument("configuration window must be non-empty");
}

void Configuration::set(Site x, SiteState s) {
  if (!in_window(x)) throw WindowOverflow("site " + std::to_string(x) + " outside configuration window");
  states_[idx(x)] = s;
}

std::int64_t Configuration::total_particles() const {
  std::int64_t n = 0;
  for (auto s : states_) n += s.particles();
  return n;
}

std::int64_t Configuration::particles_in(const Interval& v) const {
  std::int64_t n = 0;
  for (Site x = v.lo; x <= v.hi; ++x) n += at(x).particles();
  return n;
}

Configuration Configuration::shifted(Site shift) const { return Configuration(lo_ - shift, states_); }

Configuration Configuration::slice(Site lo, Site hi) const {
  if (!window().contains(Interval{lo, hi}) || hi < lo) throw WindowOverflow("slice outside configuration window");
  return Configuration(lo, std::vector<SiteState>(states_.begin() + static_cast<std::ptrdiff_t>(idx(lo)),
                                                  states_.begin() + static_cast<std::ptrdiff_t>(idx(hi)) + 1));
}

Configuration Configuration::mirrored() const {
  std::vector<SiteState> rev(states_.rbegin(), states_.rend());
  return Configuration(-hi(), std::move(rev));
}

bool config_leq(const Configuration& a, const Configuration& b) {
  const Site lo = std::min(a.lo(), b.lo());
  const Site hi = std::max(a.hi(), b.hi());
  for (Site x = lo; x <= hi; ++x) {
    if (!state_leq(a.at(x), b.at(x))) return false;
  }
  return true;
}

Odometer::Odometer(Interval range) : lo_(range.lo) {
  counts_.assign(static_cast<std::size_t>(range.size()), 0);
}

void Odometer::set(Site x, std::uint64_t v) {
  if (counts_.empty()) {
    lo_ = x;
    counts_.assign(1, 0);
  } else if (x < lo_) {
    counts_.insert(counts_.begin(), static_cast<std::size_t>(lo_ - x), 0);
    lo_ = x;
  } else if (x >= lo_ + static_cast<Site>(counts_.size())) {
    counts_.resize(static_cast<std::size_t>(x - lo_ + 1), 0);
  }
  counts_[idx(x)] = v;
}

std::uint64_t Odometer::total() const {
  std::uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::vector<Site> Odometer::support() const {
  std::vector<Site> out;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] > 0) out.push_back(lo_ + static_cast<Site>(i));
  }
  return out;
}

namespace {

template <class Cmp>
bool pointwise(const Odometer& a, const Odometer& b, Cmp cmp) {
  const auto ra = a.range();
  const auto rb = b.range();
  Site lo = std::min(ra.lo, rb.lo);
  Site hi = std::max(ra.hi, rb.hi);
  if (ra.empty()) lo = rb.lo, hi = rb.hi;
  if (rb.empty()) lo = ra.lo, hi = ra.hi;
  for (Site x = lo; x <= hi; ++x) {
    if (!cmp(a.at(x), b.at(x))) return false;
  }
  return true;
}

}  // namespace

bool operator==(const Odometer& a, const Odometer& b) {
  return pointwise(a, b, [](auto x, auto y) { return x == y; });
}

bool odometer_leq(const Odometer& a, const Odometer& b) {
  return pointwise(a, b, [](auto x, auto y) { return x <= y; });
}

Configuration wake(const Configuration& config, std::span<const Site> sites) {
  Configuration out = config;
  for (Site x : sites) {
    if (!config.in_window(x)) throw WindowOverflow("wake set leaves the configuration window");
    if (out.at(x).is_sleeping()) out.set(x, SiteState::active(1));
  }
  return out;
}

Configuration wake(const Configuration& config, const Interval& sites) {
  if (!config.window().contains(sites)) throw WindowOverflow("wake set leaves the configuration window");
  Configuration out = config;
  for (Site x = sites.lo; x <= sites.hi; ++x) {
    if (out.raw(x).is_sleeping()) out.raw(x) = SiteState::active(1);
  }
  return out;
}

bool is_stable(const Configuration& config, const Interval& v) {
  for (Site x = v.lo; x <= v.hi; ++x) {
    if (config.at(x).is_active()) return false;
  }
  return true;
}

bool is_stable(const Configuration& config, std::span<const Site> v) {
  return std::none_of(v.begin(), v.end(), [&](Site x) { return config.at(x).is_active(); });
}

ToppleEvent topple(Configuration& config, Odometer& odometer, const InstructionSource& source, Site site,
                   std::uint64_t offset) {
  if (!config.in_window(site)) throw WindowOverflow("toppled site outside window");
  SiteState& here = config.raw(site);
  if (!here.is_active()) throw IllegalTopple("site " + std::to_string(site) + " holds no active particle");
  if (!config.in_window(site - 1) || !config.in_window(site + 1)) {
    throw WindowOverflow("toppled site " + std::to_string(site) + " lacks a neighbor inside the window");
  }
  const Instruction ins = source.at(site, offset + odometer.at(site));
  if (odometer.range().contains(site)) {
    odometer.increment(site);
  } else {
    odometer.set(site, odometer.at(site) + 1);
  }

  ToppleEvent ev{site, ins, ToppleEffect::SleepNoOp};
  if (ins == Instruction::Sleep) {
    if (here.active_count() == 1) {
      here = SiteState::sleeping();
      ev.effect = ToppleEffect::FellAsleep;
    }
    return ev;
  }
  const Site to = ins == Instruction::Left ? site - 1 : site + 1;
  here = SiteState::from_count(here.active_count() - 1, false);
  SiteState& there = config.raw(to);
  there = SiteState::active(there.particles() + 1);
  ev.effect = ins == Instruction::Left ? ToppleEffect::MovedLeft : ToppleEffect::MovedRight;
  return ev;
}

std::string format_state(SiteState s) {
  if (s.is_empty()) return "0";
  if (s.is_sleeping()) return "s";
  return std::to_string(s.active_count());
}

SiteState parse_state(std::string_view token) {
  if (token == "s") return SiteState::sleeping();
  std::int32_t v = -1;
  const auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || p != token.data() + token.size() || v < 0) {
    throw std::invalid_argument("bad site state '" + std::string(token) + "'");
  }
  return v == 0 ? SiteState::empty() : SiteState::active(v);
}

void write_configuration(std::ostream& os, const Configuration& config) {
  for (Site x = config.lo(); x <= config.hi(); ++x) os << x << '\t' << format_state(config.at(x)) << '\n';
}

std::string format_configuration(const Configuration& config) {
  std::ostringstream os;
  write_configuration(os, config);
  return os.str();
}

Configuration parse_configuration(std::istream& is) {
  std::string line;
  std::vector<SiteState> states;
  Site lo = 0;
  Site expect = 0;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected site<TAB>state");
    }
    Site x = 0;
    const auto [p, ec] = std::from_chars(line.data(), line.data() + tab, x);
    if (ec != std::errc() || p != line.data() + tab) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": bad site index");
    }
    if (states.empty()) {
      lo = x;
    } else if (x != expect) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": sites must be contiguous and ascending");
    }
    states.push_back(parse_state(std::string_view(line).substr(tab + 1)));
    expect = x + 1;
  }
  if (states.empty()) throw std::invalid_argument("configuration text has no sites");
  return Configuration(lo, std::move(states));
}

Configuration parse_configuration(const std::string& text) {
  std::istringstream is(text);
  return parse_configuration(is);
}

}  // namespace arw
