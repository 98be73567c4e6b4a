#include <doctest.h>

#include <set>

#include "arw/initdist.hpp"
#include "arw/lemmas.hpp"
#include "arw/stabilizer.hpp"
#include "arw/stats.hpp"

using namespace arw;
using I = Instruction;

namespace {

InstructionSource script(std::map<Site, std::vector<I>> stacks, I fallback = I::Sleep) {
  return InstructionSource::scripted(stacks, fallback);
}

using Terminal = std::pair<std::vector<std::uint64_t>, std::vector<std::int64_t>>;

std::vector<std::int64_t> ranks(const Configuration& c) {
  std::vector<std::int64_t> r;
  for (auto s : c.states()) r.push_back(s.rank());
  return r;
}

// Every maximal legal toppling sequence on V, explored depth first over
// distinct intermediate states.
void explore(const Configuration& c, const Odometer& u, const InstructionSource& src, const Interval& v,
             std::set<Terminal>& seen, std::set<Terminal>& out) {
  std::vector<std::uint64_t> odo;
  for (Site x = v.lo; x <= v.hi; ++x) odo.push_back(u.at(x));
  Terminal key{odo, ranks(c)};
  if (!seen.insert(key).second) return;
  REQUIRE(seen.size() < 200'000);
  bool any = false;
  for (Site x = v.lo; x <= v.hi; ++x) {
    if (!c.at(x).is_active()) continue;
    any = true;
    Configuration c2 = c;
    Odometer u2 = u;
    topple(c2, u2, src, x);
    explore(c2, u2, src, v, seen, out);
  }
  if (!any) out.insert(key);
}

std::set<Terminal> all_terminals(const Configuration& c, const InstructionSource& src, const Interval& v) {
  std::set<Terminal> seen, out;
  explore(c, Odometer(), src, v, seen, out);
  return out;
}

Terminal terminal_of(const StabilizeReport& r, const Interval& v) {
  std::vector<std::uint64_t> odo;
  for (Site x = v.lo; x <= v.hi; ++x) odo.push_back(r.odometer.at(x));
  return {odo, ranks(r.final)};
}

}  // namespace

TEST_CASE("stabilize: all empty") {
  const Configuration c(0, 11);
  const auto r = stabilize(c, InstructionSource::random(1, Params{1.0}), Interval{1, 10});
  CHECK(r.topplings == 0);
  CHECK(r.odometer.total() == 0);
  CHECK(r.visited.empty());
  CHECK_FALSE(r.capped);
}

TEST_CASE("stabilize: move then sleep") {
  Configuration c(0, 3);
  c.set(1, SiteState::active(1));
  const auto src = script({{1, {I::Right}}, {2, {I::Sleep}}});
  const Interval v{1, 2};
  const auto r = stabilize(c, src, v);
  CHECK(r.odometer.at(1) == 1);
  CHECK(r.odometer.at(2) == 1);
  CHECK(r.final.at(1).is_empty());
  CHECK(r.final.at(2).is_sleeping());
  CHECK(r.visited == std::vector<Site>{1, 2});

  const auto all = all_terminals(c, src, v);
  REQUIRE(all.size() == 1);
  CHECK(*all.begin() == terminal_of(r, v));
}

TEST_CASE("stabilize: sleep at a crowded site is consumed") {
  Configuration c(0, 3);
  c.set(1, SiteState::active(2));
  const auto src = script({{1, {I::Sleep, I::Right, I::Sleep}}, {2, {I::Sleep}}});
  const Interval v{1, 2};
  const auto r = stabilize(c, src, v);
  CHECK(r.odometer.at(1) == 3);
  CHECK(r.odometer.at(2) == 1);
  CHECK(r.final.at(1).is_sleeping());
  CHECK(r.final.at(2).is_sleeping());

  const auto all = all_terminals(c, src, v);
  REQUIRE(all.size() == 1);
  CHECK(*all.begin() == terminal_of(r, v));
}

TEST_CASE("brute-force oracle agrees on small random instances") {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    CAPTURE(seed);
    const std::uint64_t s = mix::derive(77, seed);
    Configuration c(0, 5);
    for (Site x = 0; x <= 5; ++x) {
      const auto n = static_cast<std::int32_t>(mix::derive(s, 1, static_cast<std::uint64_t>(x)) % 3);
      c.set(x, SiteState::from_count(n, mix::derive(s, 2, static_cast<std::uint64_t>(x)) % 2 == 0));
    }
    // High sleep rate keeps the tree of orders small.
    const auto src = InstructionSource::random(s, Params{4.0});
    const Interval v{1, 3};
    const auto all = all_terminals(c, src, v);
    REQUIRE(all.size() == 1);
    for (const Policy& p : {Policy::fifo(), Policy::leftmost(), Policy::rightmost(), Policy::random_queue(s)}) {
      const auto r = stabilize(c, src, v, p);
      REQUIRE_FALSE(r.capped);
      REQUIRE(terminal_of(r, v) == *all.begin());
    }
  }
}

TEST_CASE("stabilize: halo sites and outside actives are never toppled") {
  Configuration c(0, 4);
  c.set(0, SiteState::active(2));
  c.set(2, SiteState::active(1));
  c.set(4, SiteState::active(3));
  const auto r = stabilize(c, script({{2, {I::Left}}}), Interval{2, 2});
  CHECK(r.final.at(0) == SiteState::active(2));
  CHECK(r.final.at(1) == SiteState::active(1));
  CHECK(r.final.at(4) == SiteState::active(3));
  CHECK(r.arrived(1));
  CHECK_FALSE(r.arrived(3));
  CHECK(r.odometer.at(1) == 0);
}

TEST_CASE("stabilize: errors") {
  const Configuration c(0, 4);
  const auto src = script({});
  CHECK_THROWS_AS(stabilize(c, src, Interval{3, 2}), std::invalid_argument);
  CHECK_THROWS_AS(stabilize(c, src, Interval{0, 3}), WindowOverflow);
  CHECK_THROWS_AS(stabilize(c, src, Interval{1, 4}), WindowOverflow);
}

TEST_CASE("stabilize: capped run is reported") {
  // Without sleep three walkers cannot stop inside a long interval within 50 steps.
  const auto src = InstructionSource::random(3, Params{0.0});
  Configuration closed(0, 12);
  closed.set(5, SiteState::active(3));
  const auto r = stabilize(closed, src, Interval{1, 11}, Policy::fifo(), 50);
  CHECK(r.capped);
  CHECK(r.topplings == 50);
  CHECK(r.odometer.total() == 50);
}

TEST_CASE("stabilize: report invariants") {
  for (const auto& in : generate_instances(5, 100)) {
    const auto r = stabilize(in.sigma, InstructionSource::random(in.source_seed, Params{in.lambda}), in.v);
    REQUIRE_FALSE(r.capped);
    REQUIRE(is_stable(r.final, in.v));
    REQUIRE(r.final.total_particles() == in.sigma.total_particles());
    std::vector<Site> support;
    for (Site x = in.v.lo; x <= in.v.hi; ++x)
      if (r.odometer.at(x) > 0) support.push_back(x);
    REQUIRE(r.visited == support);
    REQUIRE(r.topplings == r.odometer.total());
  }
}

TEST_CASE("midstream: zero offsets match stabilize") {
  for (const auto& in : generate_instances(9, 50)) {
    const auto src = InstructionSource::random(in.source_seed, Params{in.lambda});
    const auto a = stabilize(in.sigma, src, in.v);
    const auto b = stabilize_midstream(in.sigma, src, in.v, Odometer());
    REQUIRE(a.odometer == b.odometer);
    REQUIRE(a.final == b.final);
  }
}

TEST_CASE("midstream: instructions start at the offset") {
  Configuration c(0, 2);
  c.set(1, SiteState::active(1));
  Odometer u0;
  u0.set(1, 1);
  const auto r = stabilize_midstream(c, script({{1, {I::Sleep, I::Right}}}), Interval{1, 1}, u0);
  CHECK(r.arrived(2));
  CHECK(r.odometer.at(1) == 1);
  CHECK(r.final.at(2) == SiteState::active(1));
}

TEST_CASE("event_ek examples") {
  SUBCASE("empty") {
    const Configuration c(0, 11);
    const auto e = event_ek(c, InstructionSource::random(1, Params{1.0}), 10);
    REQUIRE(e.holds);
    CHECK(*e.holds);
  }
  SUBCASE("first toppling escapes") {
    Configuration c(0, 2);
    c.set(1, SiteState::active(2));
    const auto e = event_ek(c, script({{1, {I::Right, I::Left}}}), 1);
    REQUIRE(e.holds);
    CHECK_FALSE(*e.holds);
  }
  SUBCASE("woken sleeper falls asleep") {
    Configuration c(0, 2);
    c.set(1, SiteState::sleeping());
    const auto e = event_ek(c, script({{1, {I::Sleep}}}), 1);
    REQUIRE(e.holds);
    CHECK(*e.holds);
  }
  SUBCASE("left side mirrors") {
    Configuration c(-2, 0);
    c.set(-1, SiteState::active(2));
    const auto e = event_ek(c, script({{-1, {I::Left, I::Right}}}), 1, kDefaultCap, Side::Left);
    REQUIRE(e.holds);
    CHECK_FALSE(*e.holds);
  }
  SUBCASE("capped is undetermined") {
    Configuration c(0, 31);
    for (Site x = 1; x <= 30; ++x) c.set(x, SiteState::active(1));
    const auto e = event_ek(c, InstructionSource::random(2, Params{0.0}), 30, 5);
    CHECK_FALSE(e.holds);
    CHECK(e.report.capped);
  }
}

TEST_CASE("event_ek early stop agrees with the full run") {
  const auto spec = EnvSpec::iid(Marginal::poisson(0.9));
  int escapes = 0;
  for (std::uint64_t t = 0; t < 300; ++t) {
    const std::int64_t k = 5 + static_cast<std::int64_t>(t % 30);
    const auto sigma = sample_configuration(spec, SleepMix{0.5}, Interval{0, k + 1}, mix::derive(31, t));
    const auto src = InstructionSource::random(mix::derive(32, t), Params{1.0});
    const auto fast = event_ek(sigma, src, k);
    const auto slow = event_ek(sigma, src, k, kDefaultCap, Side::Right, nullptr, false);
    REQUIRE(fast.holds);
    REQUIRE(slow.holds);
    REQUIRE(*fast.holds == *slow.holds);
    if (!*fast.holds) ++escapes;
    REQUIRE(odometer_leq(fast.report.odometer, slow.report.odometer));
  }
  CHECK(escapes > 0);
  CHECK(escapes < 300);
}

TEST_CASE("event_ek left equals right on the mirrored configuration") {
  const auto spec = EnvSpec::iid(Marginal::poisson(0.8));
  for (std::uint64_t t = 0; t < 100; ++t) {
    const std::int64_t k = 12;
    const auto sigma = sample_configuration(spec, SleepMix{0.3}, Interval{0, k + 1}, t);
    // Mirror the stacks too, swapping left and right.
    const auto base = InstructionSource::random(mix::derive(40, t), Params{1.0});
    std::map<std::pair<Site, std::uint64_t>, I> right_table;
    std::map<std::pair<Site, std::uint64_t>, I> left_table;
    for (Site x = 0; x <= k + 1; ++x) {
      for (std::uint64_t i = 0; i < 400; ++i) {
        const I ins = base.at(x, i);
        right_table[{x, i}] = ins;
        left_table[{-x, i}] = ins == I::Left ? I::Right : (ins == I::Right ? I::Left : I::Sleep);
      }
    }
    const auto r = event_ek(sigma, InstructionSource::scripted(right_table, I::Sleep), k);
    const auto l = event_ek(sigma.mirrored(), InstructionSource::scripted(left_table, I::Sleep), k, kDefaultCap,
                            Side::Left);
    REQUIRE(r.holds == l.holds);
  }
}

TEST_CASE("exact lemma suites on a small instance set") {
  const auto inst = generate_instances(11, 120);
  CHECK(check_abelian(inst, kDefaultCap).passed());
  CHECK(check_preemptive(inst, kDefaultCap).passed());
  CHECK(check_monotonicity(inst, 12, kDefaultCap).passed());
  CHECK(check_window_growth(13, 60, kDefaultCap).passed());
}

TEST_CASE("finite windows terminate well below the cap") {
  const auto spec = EnvSpec::iid(Marginal::poisson(1.5));
  for (std::uint64_t t = 0; t < 40; ++t) {
    const std::int64_t len = 1 + static_cast<std::int64_t>(mix::derive(50, t) % 200);
    const auto sigma = sample_configuration(spec, SleepMix{0.0}, Interval{0, len + 1}, mix::derive(51, t));
    const auto r = stabilize(sigma, InstructionSource::random(mix::derive(52, t), Params{0.5 + (t % 3) * 0.75}),
                             Interval{1, len});
    REQUIRE_FALSE(r.capped);
  }
}

TEST_CASE("midstream offsets do not change the law of E_k") {
  constexpr std::uint64_t trials = 2000;
  constexpr std::int64_t k = 20;
  const auto spec = EnvSpec::iid(Marginal::poisson(0.7));
  std::uint64_t zero = 0;
  std::uint64_t shifted = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto sigma = sample_configuration(spec, SleepMix{1.0}, Interval{0, k + 1}, mix::derive(60, t));
    const auto src = InstructionSource::random(mix::derive(61, t), Params{1.0});
    if (*event_ek(sigma, src, k).holds) ++zero;
    // Independent pair: fresh sigma and source, offsets far beyond anything consumed.
    const auto sigma2 = sample_configuration(spec, SleepMix{1.0}, Interval{0, k + 1}, mix::derive(62, t));
    const auto src2 = InstructionSource::random(mix::derive(63, t), Params{1.0});
    Odometer u0;
    for (Site x = 0; x <= k + 1; ++x) u0.set(x, 1'000'000 + mix::derive(64, t, static_cast<std::uint64_t>(x)) % 1000);
    if (*event_ek(sigma2, src2, k, kDefaultCap, Side::Right, &u0).holds) ++shifted;
  }
  const double p = stats::two_proportion_pvalue(zero, trials, shifted, trials);
  CAPTURE(zero);
  CAPTURE(shifted);
  CHECK(p >= 0.01);
  CHECK(zero > 0);
  CHECK(zero < trials);
}
