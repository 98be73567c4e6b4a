#pragma once

// Stabilization of a configuration on a finite interval V by legal
// topplings. Sites of V are toppled while they hold active particles; the
// two halo sites V.lo - 1 and V.hi + 1 absorb arrivals and are never
// toppled. The resulting odometer does not depend on the toppling order.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "arw/core.hpp"

namespace arw {

inline constexpr std::uint64_t kDefaultCap = 100'000'000;

enum class PolicyKind : std::uint8_t { Leftmost, Rightmost, Fifo, RandomQueue };

/// Which legal toppling to perform next.
struct Policy {
  PolicyKind kind = PolicyKind::Fifo;
  std::uint64_t seed = 0;  // RandomQueue only

  static Policy leftmost() { return {PolicyKind::Leftmost, 0}; }
  static Policy rightmost() { return {PolicyKind::Rightmost, 0}; }
  static Policy fifo() { return {PolicyKind::Fifo, 0}; }
  static Policy random_queue(std::uint64_t seed) { return {PolicyKind::RandomQueue, seed}; }
};

struct StabilizeReport {
  Odometer odometer;
  Configuration final;
  std::vector<Site> visited;
  /// Halo site -> whether any particle landed there.
  std::map<Site, bool> arrivals;
  std::uint64_t topplings = 0;
  bool capped = false;
  /// Run halted by a stop condition before V became stable.
  bool stopped_early = false;

  bool arrived(Site halo) const {
    const auto it = arrivals.find(halo);
    return it != arrivals.end() && it->second;
  }
};

struct StabilizeOptions {
  /// Midstream start: instructions at site x are read from index offsets(x).
  const Odometer* offsets = nullptr;
  /// Halt as soon as a particle lands on this halo site.
  std::optional<Site> stop_on_arrival;
  /// Halt as soon as every listed site has been toppled at least once.
  std::vector<Site> stop_when_visited;
  /// Only sites reached by the activity started at `ignite` are toppled;
  /// other active sites wait until a particle arrives.
  std::optional<Site> ignite;
};

/// Topples policy-selected active sites of V until V is stable or `cap`
/// topplings have been performed.
StabilizeReport stabilize(const Configuration& config, const InstructionSource& source, const Interval& v,
                          const Policy& policy = {}, std::uint64_t cap = kDefaultCap,
                          const StabilizeOptions& options = {});

/// As stabilize, but the first instruction executed at site x is the one at
/// index u0(x). The reported odometer counts only the new topplings.
StabilizeReport stabilize_midstream(const Configuration& config, const InstructionSource& source,
                                    const Interval& v, const Odometer& u0, const Policy& policy = {},
                                    std::uint64_t cap = kDefaultCap);

enum class Side : std::uint8_t { Left, Right };

struct EkOutcome {
  /// Empty when the run was capped.
  std::optional<bool> holds;
  StabilizeReport report;
};

/// E_k on the right: wake [1, k], stabilize on [1, k], true iff nothing
/// reaches k + 1. On the left the roles are mirrored: [-k, -1] and -k - 1.
///
/// With `stop_at_escape` the run halts at the first arrival at the far
/// halo site; that arrival already decides the event, since any legal
/// partial odometer is dominated by the stabilizing one.
EkOutcome event_ek(const Configuration& sigma, const InstructionSource& source, std::int64_t k,
                   std::uint64_t cap = kDefaultCap, Side side = Side::Right, const Odometer* offsets = nullptr,
                   bool stop_at_escape = true);

}  // namespace arw
