#pragma once

// Configurations, odometers, the wake operator and single-site toppling.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arw/stacks.hpp"

namespace arw {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Toppling a site that holds no active particle.
class IllegalTopple : public Error {
 public:
  using Error::Error;
};

/// A particle would leave the stored window.
class WindowOverflow : public Error {
 public:
  using Error::Error;
};

/// Occupancy of one site: empty, one sleeping particle, or n >= 1 active
/// particles. Two or more particles are always active.
class SiteState {
 public:
  constexpr SiteState() = default;

  static constexpr SiteState empty() { return SiteState(0); }
  static constexpr SiteState sleeping() { return SiteState(kSleeping); }
  static SiteState active(std::int32_t count) {
    if (count < 1) throw std::invalid_argument("active site needs at least one particle");
    return SiteState(count);
  }
  /// State for `count` particles where a lone particle is sleeping or not.
  static SiteState from_count(std::int32_t count, bool lone_sleeps) {
    if (count < 0) throw std::invalid_argument("negative particle count");
    if (count == 0) return empty();
    if (count == 1 && lone_sleeps) return sleeping();
    return SiteState(count);
  }

  constexpr bool is_empty() const { return code_ == 0; }
  constexpr bool is_sleeping() const { return code_ == kSleeping; }
  constexpr bool is_active() const { return code_ > 0; }
  /// Active particle count (0 unless active).
  constexpr std::int32_t active_count() const { return code_ > 0 ? code_ : 0; }
  constexpr std::int32_t particles() const { return code_ == kSleeping ? 1 : code_; }

  /// Rank in the order 0 < s < 1 < 2 < ...
  constexpr std::int64_t rank() const { return code_ == kSleeping ? 1 : (code_ == 0 ? 0 : code_ + 1); }

  friend constexpr bool operator==(SiteState, SiteState) = default;

 private:
  static constexpr std::int32_t kSleeping = -1;
  constexpr explicit SiteState(std::int32_t code) : code_(code) {}

  // 0 empty, -1 sleeping, n > 0 active count.
  std::int32_t code_ = 0;

  friend class Configuration;
};

std::int32_t particle_count(SiteState state);

/// Total order Empty < Sleeping < Active{1} < Active{2} < ...
bool state_leq(SiteState a, SiteState b);

/// Closed integer interval [lo, hi].
struct Interval {
  Site lo = 0;
  Site hi = -1;

  bool empty() const { return hi < lo; }
  bool contains(Site x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& other) const {
    return other.empty() || (lo <= other.lo && other.hi <= hi);
  }
  std::int64_t size() const { return empty() ? 0 : hi - lo + 1; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite window of Z with a state per site. Sites outside the window are
/// empty and never receive particles.
class Configuration {
 public:
  Configuration() = default;
  Configuration(Site lo, Site hi);
  Configuration(Site lo, std::vector<SiteState> states);

  Site lo() const { return lo_; }
  Site hi() const { return lo_ + static_cast<Site>(states_.size()) - 1; }
  Interval window() const { return {lo(), hi()}; }
  bool in_window(Site x) const { return x >= lo_ && x <= hi(); }

  SiteState at(Site x) const { return in_window(x) ? states_[idx(x)] : SiteState::empty(); }
  void set(Site x, SiteState s);

  std::span<const SiteState> states() const { return states_; }

  std::int64_t total_particles() const;
  std::int64_t particles_in(const Interval& v) const;

  /// Same states, relabelled so that site x becomes x - shift.
  Configuration shifted(Site shift) const;
  /// Sub-window [lo, hi] (must lie inside the window).
  Configuration slice(Site lo, Site hi) const;
  /// Site x becomes -x.
  Configuration mirrored() const;

  friend bool operator==(const Configuration&, const Configuration&) = default;

  // Hot-path accessors used by the stabilizer.
  SiteState& raw(Site x) { return states_[idx(x)]; }
  SiteState raw(Site x) const { return states_[idx(x)]; }

 private:
  std::size_t idx(Site x) const { return static_cast<std::size_t>(x - lo_); }

  Site lo_ = 0;
  std::vector<SiteState> states_;
};

/// Pointwise order on configurations (sites outside either window are empty).
bool config_leq(const Configuration& a, const Configuration& b);

/// Per-site instruction counts. Zero outside the stored range.
class Odometer {
 public:
  Odometer() = default;
  explicit Odometer(Interval range);

  std::uint64_t at(Site x) const {
    return (x >= lo_ && x < lo_ + static_cast<Site>(counts_.size())) ? counts_[idx(x)] : 0;
  }
  void set(Site x, std::uint64_t v);
  void increment(Site x) { ++counts_[idx(x)]; }

  Interval range() const { return {lo_, lo_ + static_cast<Site>(counts_.size()) - 1}; }
  std::uint64_t total() const;
  /// Sites with a positive count, ascending.
  std::vector<Site> support() const;

  /// Pointwise comparison over the union of ranges.
  friend bool operator==(const Odometer& a, const Odometer& b);
  friend bool odometer_leq(const Odometer& a, const Odometer& b);

 private:
  std::size_t idx(Site x) const { return static_cast<std::size_t>(x - lo_); }

  Site lo_ = 0;
  std::vector<std::uint64_t> counts_;
};

bool odometer_leq(const Odometer& a, const Odometer& b);

enum class ToppleEffect : std::uint8_t { MovedLeft, MovedRight, FellAsleep, SleepNoOp };

struct ToppleEvent {
  Site site = 0;
  Instruction instruction = Instruction::Sleep;
  ToppleEffect effect = ToppleEffect::SleepNoOp;
};

/// Wakes every sleeping particle at the sites of `sites`.
Configuration wake(const Configuration& config, std::span<const Site> sites);
Configuration wake(const Configuration& config, const Interval& sites);

/// True iff no site of `v` holds an active particle.
bool is_stable(const Configuration& config, const Interval& v);
bool is_stable(const Configuration& config, std::span<const Site> v);

/// Executes the next instruction at `site`: the one at index
/// offset + odometer(site). Increments the odometer.
ToppleEvent topple(Configuration& config, Odometer& odometer, const InstructionSource& source, Site site,
                   std::uint64_t offset = 0);

// Text format: one line per site, "site<TAB>state", state in {0, s, k}.
std::string format_configuration(const Configuration& config);
void write_configuration(std::ostream& os, const Configuration& config);
/// Sites must be contiguous; '#' starts a comment line.
Configuration parse_configuration(std::istream& is);
Configuration parse_configuration(const std::string& text);
std::string format_state(SiteState s);
SiteState parse_state(std::string_view token);

}  // namespace arw
