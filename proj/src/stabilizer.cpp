#include "arw/stabilizer.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace arw {

namespace {

// Schedulers hold candidate sites; entries may be stale (no longer active)
// and are filtered by the engine on pop.

class FifoScheduler {
 public:
  explicit FifoScheduler(const Interval& v) : lo_(v.lo), queued_(static_cast<std::size_t>(v.size()), 0) {}
  void push(Site x) {
    auto& q = queued_[static_cast<std::size_t>(x - lo_)];
    if (!q) {
      q = 1;
      queue_.push_back(x);
    }
  }
  std::optional<Site> pop() {
    if (queue_.empty()) return std::nullopt;
    const Site x = queue_.front();
    queue_.pop_front();
    queued_[static_cast<std::size_t>(x - lo_)] = 0;
    return x;
  }

 private:
  Site lo_;
  std::vector<char> queued_;
  std::deque<Site> queue_;
};

class OrderedScheduler {
 public:
  explicit OrderedScheduler(bool leftmost) : leftmost_(leftmost) {}
  void push(Site x) { set_.insert(x); }
  std::optional<Site> pop() {
    if (set_.empty()) return std::nullopt;
    auto it = leftmost_ ? set_.begin() : std::prev(set_.end());
    const Site x = *it;
    set_.erase(it);
    return x;
  }

 private:
  bool leftmost_;
  std::set<Site> set_;
};

class RandomScheduler {
 public:
  RandomScheduler(const Interval& v, std::uint64_t seed)
      : lo_(v.lo), seed_(seed), pos_(static_cast<std::size_t>(v.size()), kAbsent) {}
  void push(Site x) {
    auto& p = pos_[static_cast<std::size_t>(x - lo_)];
    if (p == kAbsent) {
      p = pool_.size();
      pool_.push_back(x);
    }
  }
  std::optional<Site> pop() {
    if (pool_.empty()) return std::nullopt;
    const std::size_t i = mix::fmix64(mix::derive(seed_, draws_++)) % pool_.size();
    const Site x = pool_[i];
    pos_[static_cast<std::size_t>(pool_.back() - lo_)] = i;
    pool_[i] = pool_.back();
    pool_.pop_back();
    pos_[static_cast<std::size_t>(x - lo_)] = kAbsent;
    return x;
  }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  Site lo_;
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  std::vector<std::size_t> pos_;
  std::vector<Site> pool_;
};

template <class Scheduler>
void run_engine(Scheduler& sched, StabilizeReport& rep, const InstructionSource& source, const Interval& v,
                std::uint64_t cap, const StabilizeOptions& opt) {
  Configuration& cfg = rep.final;
  Odometer& odo = rep.odometer;
  const Site halo_lo = v.lo - 1;
  const Site halo_hi = v.hi + 1;

  std::vector<char> touched;
  if (opt.ignite) {
    touched.assign(static_cast<std::size_t>(v.size()), 0);
    touched[static_cast<std::size_t>(*opt.ignite - v.lo)] = 1;
    if (cfg.raw(*opt.ignite).is_active()) sched.push(*opt.ignite);
  } else {
    for (Site x = v.lo; x <= v.hi; ++x) {
      if (cfg.raw(x).is_active()) sched.push(x);
    }
  }

  std::vector<char> watch(static_cast<std::size_t>(v.size()), 0);
  std::size_t watch_left = 0;
  for (Site x : opt.stop_when_visited) {
    if (v.contains(x) && !watch[static_cast<std::size_t>(x - v.lo)]) {
      watch[static_cast<std::size_t>(x - v.lo)] = 1;
      ++watch_left;
    }
  }
  const bool watching = !opt.stop_when_visited.empty();

  while (auto next = sched.pop()) {
    const Site x = *next;
    if (!cfg.raw(x).is_active()) continue;
    if (rep.topplings >= cap) {
      rep.capped = true;
      break;
    }
    const std::uint64_t offset = opt.offsets ? opt.offsets->at(x) : 0;
    const ToppleEvent ev = topple(cfg, odo, source, x, offset);
    ++rep.topplings;

    if (watching && watch[static_cast<std::size_t>(x - v.lo)] && odo.at(x) == 1) {
      if (--watch_left == 0) {
        rep.stopped_early = true;
        break;
      }
    }
    if (ev.effect == ToppleEffect::MovedLeft || ev.effect == ToppleEffect::MovedRight) {
      const Site to = ev.effect == ToppleEffect::MovedLeft ? x - 1 : x + 1;
      if (to == halo_lo || to == halo_hi) {
        rep.arrivals[to] = true;
        if (opt.stop_on_arrival && *opt.stop_on_arrival == to) {
          rep.stopped_early = true;
          break;
        }
      } else {
        if (opt.ignite) touched[static_cast<std::size_t>(to - v.lo)] = 1;
        sched.push(to);
      }
    }
    if (cfg.raw(x).is_active()) sched.push(x);
  }
}

}  // namespace

StabilizeReport stabilize(const Configuration& config, const InstructionSource& source, const Interval& v,
                          const Policy& policy, std::uint64_t cap, const StabilizeOptions& options) {
  if (v.empty()) throw std::invalid_argument("stabilization region must be a non-empty interval");
  if (!config.in_window(v.lo - 1) || !config.in_window(v.hi + 1)) {
    throw WindowOverflow("stabilization region needs a one-site halo inside the configuration window");
  }
  if (options.ignite && !v.contains(*options.ignite)) {
    throw std::invalid_argument("ignition site must lie in the stabilization region");
  }

  StabilizeReport rep;
  rep.final = config;
  rep.odometer = Odometer(v);
  rep.arrivals = {{v.lo - 1, false}, {v.hi + 1, false}};

  switch (policy.kind) {
    case PolicyKind::Fifo: {
      FifoScheduler s(v);
      run_engine(s, rep, source, v, cap, options);
      break;
    }
    case PolicyKind::Leftmost:
    case PolicyKind::Rightmost: {
      OrderedScheduler s(policy.kind == PolicyKind::Leftmost);
      run_engine(s, rep, source, v, cap, options);
      break;
    }
    case PolicyKind::RandomQueue: {
      RandomScheduler s(v, policy.seed);
      run_engine(s, rep, source, v, cap, options);
      break;
    }
  }
  rep.visited = rep.odometer.support();
  return rep;
}

StabilizeReport stabilize_midstream(const Configuration& config, const InstructionSource& source,
                                    const Interval& v, const Odometer& u0, const Policy& policy,
                                    std::uint64_t cap) {
  StabilizeOptions opt;
  opt.offsets = &u0;
  return stabilize(config, source, v, policy, cap, opt);
}

EkOutcome event_ek(const Configuration& sigma, const InstructionSource& source, std::int64_t k,
                   std::uint64_t cap, Side side, const Odometer* offsets, bool stop_at_escape) {
  if (k < 1) throw std::invalid_argument("E_k needs k >= 1");
  const Interval v = side == Side::Right ? Interval{1, k} : Interval{-k, -1};
  const Site escape = side == Side::Right ? k + 1 : -k - 1;
  if (!sigma.in_window(v.lo - 1) || !sigma.in_window(v.hi + 1)) {
    throw WindowOverflow("E_k needs the configuration window to cover [0, k+1] (mirrored on the left)");
  }
  StabilizeOptions opt;
  opt.offsets = offsets;
  if (stop_at_escape) opt.stop_on_arrival = escape;

  EkOutcome out;
  out.report = stabilize(wake(sigma, v), source, v, Policy::fifo(), cap, opt);
  if (out.report.arrived(escape)) {
    out.holds = false;
  } else if (!out.report.capped) {
    out.holds = true;
  }
  return out;
}

}  // namespace arw
