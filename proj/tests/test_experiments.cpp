#include <doctest.h>

#include <cmath>
#include <random>

#include "arw/experiments.hpp"

using namespace arw;
using I = Instruction;

namespace {

InstructionSource script(std::map<Site, std::vector<I>> stacks, I fallback = I::Sleep) {
  return InstructionSource::scripted(stacks, fallback);
}

EnvSpec poisson(double rho) { return EnvSpec::iid(Marginal::poisson(rho)); }

bool same(const std::vector<EkRow>& a, const std::vector<EkRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].k != b[i].k || a[i].p.successes != b[i].p.successes || a[i].p.capped != b[i].p.capped) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("x_scan examples") {
  SUBCASE("empty") {
    const Configuration c(0, 12);
    const auto r = x_scan(c, InstructionSource::random(1, Params{1.0}), 4, 11);
    REQUIRE(r.found_k);
    CHECK(*r.found_k == 4);
    CHECK(r.witness_exact);
  }
  SUBCASE("single particle sleeps at once") {
    Configuration c(0, 4);
    c.set(1, SiteState::active(1));
    const auto r = x_scan(c, script({{1, {I::Sleep}}}), 1, 3);
    REQUIRE(r.found_k);
    CHECK(*r.found_k == 1);
  }
  SUBCASE("escape at every k is censored") {
    Configuration c(0, 6);
    c.set(1, SiteState::active(1));
    const auto r = x_scan(c, script({}, I::Right), 1, 5);
    CHECK(r.censored());
    CHECK(r.reports.size() == 5);
  }
  SUBCASE("y_scan mirrors") {
    Configuration c(-6, 0);
    c.set(-1, SiteState::active(1));
    CHECK(y_scan(c, script({}, I::Left), 1, 5).censored());
    const auto r = y_scan(c, script({}, I::Right), 1, 5);
    REQUIRE(r.found_k);
    CHECK(*r.found_k == 1);
  }
  SUBCASE("active sites beyond n are reported") {
    Configuration c(0, 6);
    c.set(5, SiteState::active(1));
    CHECK_FALSE(x_scan(c, script({}), 1, 5).witness_exact);
  }
  SUBCASE("errors") {
    const Configuration c(0, 6);
    const auto src = script({});
    CHECK_THROWS(x_scan(c, src, 1, 6));
    CHECK_THROWS(x_scan(c, src, 3, 2));
    CHECK_THROWS(y_scan(c, src, 1, 2));
  }
}

TEST_CASE("x_scan is mostly censored above the critical density") {
  constexpr int trials = 100;
  int censored = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto sigma = sample_configuration(poisson(1.2), SleepMix{1.0}, Interval{0, 301}, mix::derive(70, t));
    const auto r = x_scan(sigma, InstructionSource::random(mix::derive(71, t), Params{1.0}), 50, 300);
    REQUIRE_FALSE(r.capped);
    censored += r.censored();
  }
  MESSAGE("censored " << censored << " / " << trials);
  CHECK(censored >= 75);
}

TEST_CASE("scan and stabilize agree") {
  const auto spec = EnvSpec::iid(Marginal::finite({{0, 0.4}, {1, 0.6}}));
  int found = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    constexpr std::int64_t n = 5;
    constexpr std::int64_t K = 60;
    const auto sigma = sample_configuration(spec, SleepMix{1.0}, Interval{0, K + 21}, mix::derive(80, t));
    const auto src = InstructionSource::random(mix::derive(81, t), Params{1.0});
    const auto r = x_scan(sigma, src, n, K);
    REQUIRE(r.witness_exact);
    if (!r.found_k) continue;
    ++found;
    const std::int64_t k0 = *r.found_k;
    const auto rep = stabilize(wake(sigma, Interval{1, n}), src, Interval{1, K + 20});
    REQUIRE_FALSE(rep.capped);
    REQUIRE(rep.odometer.at(k0 + 1) == 0);
  }
  CHECK(found > 20);
}

TEST_CASE("nucleation examples") {
  SUBCASE("immediate sleep") {
    Configuration c(-3, 3);
    c.set(0, SiteState::active(1));
    const auto r = nucleation_trial(c, script({{0, {I::Sleep}}}), 1, 2);
    CHECK(r.v0 == Interval{0, 0});
    CHECK_FALSE(r.covered);
    CHECK_FALSE(r.right_scan);
    CHECK_FALSE(r.success());
  }
  SUBCASE("excursion covers [-1, 1]") {
    Configuration c(-3, 3);
    c.set(0, SiteState::active(1));
    const auto r = nucleation_trial(c, script({{0, {I::Right, I::Left}}, {1, {I::Left}}, {-1, {I::Sleep}}}), 1, 2);
    CHECK(r.v0 == Interval{-1, 1});
    CHECK(r.covered);
    CHECK(r.u0.at(0) == 2);
    CHECK(r.u0.at(1) == 1);
    CHECK(r.u0.at(-1) == 1);
    REQUIRE(r.right_scan);
    REQUIRE(r.left_scan);
    // Site 1 is empty in sigma, so E_1 holds vacuously on the right.
    CHECK(r.right_scan->found_k == std::optional<std::int64_t>(1));
  }
  SUBCASE("bystanders outside the excursion stay put") {
    Configuration c(-4, 4);
    c.set(0, SiteState::active(1));
    c.set(3, SiteState::active(2));
    const auto r = nucleation_trial(c, script({{0, {I::Sleep}}}, I::Right), 1, 3);
    CHECK(r.v0 == Interval{0, 0});
    CHECK(r.u0.at(3) == 0);
  }
  SUBCASE("errors") {
    Configuration c(-3, 3);
    CHECK_THROWS(nucleation_trial(c, script({}), 1, 2));
    c.set(0, SiteState::active(1));
    CHECK_THROWS(nucleation_trial(c, script({}), 1, 3));
    CHECK_THROWS(nucleation_trial(c, script({}), 0, 2));
  }
}

TEST_CASE("nucleation scans behave like fresh scans") {
  // One fixed sigma; only the stacks vary.
  constexpr std::int64_t m = 5;
  constexpr std::int64_t K = 40;
  Configuration sigma = sample_configuration(poisson(1.2), SleepMix{1.0}, Interval{-K - 1, K + 1}, 90);
  sigma.set(0, SiteState::active(1));
  std::uint64_t covered = 0, cond_censored = 0, fresh_censored = 0;
  constexpr std::uint64_t trials = 3000;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto rep = nucleation_trial(sigma, InstructionSource::random(mix::derive(91, t), Params{1.0}), m, K);
    REQUIRE_FALSE(rep.capped);
    if (rep.covered) {
      ++covered;
      cond_censored += rep.right_scan->censored();
    }
    fresh_censored += x_scan(sigma, InstructionSource::random(mix::derive(92, t), Params{1.0}), m, K).censored();
  }
  MESSAGE("covered " << covered << ", censored " << cond_censored << " vs fresh " << fresh_censored);
  REQUIRE(covered >= 200);
  CHECK(fresh_censored > 0);
  CHECK(fresh_censored < trials);
  CHECK(stats::two_proportion_pvalue(cond_censored, covered, fresh_censored, trials) >= 0.01);
}

TEST_CASE("reach examples") {
  SUBCASE("immediate sleep") {
    Configuration c(-3, 3);
    c.set(0, SiteState::active(1));
    const auto o = reach_trial(c, script({}), 2);
    CHECK(o.kind == TrialKind::Stabilized);
    CHECK(o.max_right == 0);
    CHECK(o.max_left == 0);
  }
  SUBCASE("walk right then sleep") {
    Configuration c(-3, 3);
    c.set(0, SiteState::active(1));
    const auto o = reach_trial(c, script({{0, {I::Right}}, {1, {I::Right}}, {2, {I::Sleep}}}), 2);
    CHECK(o.kind == TrialKind::Stabilized);
    CHECK(o.max_right == 2);
    CHECK(o.max_left == 0);
  }
  SUBCASE("both ends") {
    Configuration c(-3, 3);
    c.set(0, SiteState::active(1));
    const auto o = reach_trial(c, script({{0, {I::Left, I::Right}}, {-1, {I::Left, I::Right}}, {-2, {I::Right}},
                                          {1, {I::Right}}, {2, {I::Sleep}}}), 2);
    CHECK(o.kind == TrialKind::ReachedBoth);
    CHECK(o.max_left == 2);
    CHECK(o.max_right == 2);
  }
  SUBCASE("capped") {
    Configuration c(-11, 11);
    c.set(0, SiteState::active(2));
    CHECK(reach_trial(c, InstructionSource::random(1, Params{0.0}), 10, 3).kind == TrialKind::Capped);
  }
}

TEST_CASE("a lone walker without sleep reaches both ends at the gambler's-ruin rate") {
  // From 0 the walk hits +-R first with probability 1/2 each, and must then
  // cross to the other end before stepping into the absorbing halo.
  constexpr std::int64_t R = 20;
  constexpr std::uint64_t trials = 4000;
  std::uint64_t both = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Configuration c(-R - 1, R + 1);
    c.set(0, SiteState::active(1));
    const auto o = reach_trial(c, InstructionSource::random(mix::derive(100, t), Params{0.0}), R, 10'000'000);
    REQUIRE(o.kind != TrialKind::Capped);
    REQUIRE(std::max(o.max_left, o.max_right) == R);
    both += o.kind == TrialKind::ReachedBoth;
  }
  const double p = 1.0 / (2 * R + 1);
  const double se = std::sqrt(p * (1 - p) / trials);
  CHECK(std::abs(static_cast<double>(both) / trials - p) <= 4 * se);
}

TEST_CASE("sample_ignited") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto c = sample_ignited(poisson(0.3), SleepMix{1.0}, 15, seed);
    REQUIRE(c);
    REQUIRE(c->window() == Interval{-15, 15});
    REQUIRE(c->at(0).is_active());
  }
  CHECK_FALSE(sample_ignited(EnvSpec::iid(Marginal::finite({{0, 1.0}})), SleepMix{1.0}, 5, 1));
  CHECK(sample_ignited(poisson(1.0), SleepMix{0.5}, 30, 4) == sample_ignited(poisson(1.0), SleepMix{0.5}, 30, 4));
}

TEST_CASE("ek_curve examples") {
  McSettings mc;
  mc.trials = 50;
  const auto empty = ek_curve(1.0, EnvSpec::iid(Marginal::finite({{0, 1.0}})), SleepMix{0.0}, {1, 5, 20}, mc);
  for (const auto& row : empty) CHECK(row.p.p_hat == 1.0);

  mc.trials = 200;
  mc.seed = 4;
  const auto a = ek_curve(1.0, poisson(1.0), SleepMix{0.0}, {5, 10, 20}, mc);
  const auto b = ek_curve(1.0, poisson(1.0), SleepMix{0.0}, {5, 10, 20}, mc);
  CHECK(same(a, b));
  mc.workers = 3;
  CHECK(same(a, ek_curve(1.0, poisson(1.0), SleepMix{0.0}, {5, 10, 20}, mc)));

  CHECK_THROWS(ek_curve(1.0, poisson(1.0), SleepMix{0.0}, {10, 5}, mc));
  mc.trials = 0;
  CHECK_THROWS(ek_curve(1.0, poisson(1.0), SleepMix{0.0}, {5}, mc));
}

TEST_CASE("E_k decays in k above the critical density") {
  McSettings mc;
  mc.trials = 500;
  mc.seed = 7;
  const auto rows = ek_curve(1.0, poisson(1.2), SleepMix{0.0}, {25, 50, 100, 150}, mc);
  for (const auto& r : rows) MESSAGE("k=" << r.k << " successes=" << r.p.successes);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i - 1].p.successes > 0) {
      CHECK(rows[i].p.p_hat < rows[i - 1].p.p_hat);
    } else {
      CHECK(rows[i].p.successes == 0);
    }
  }
  CHECK(rows.front().p.p_hat > rows.back().p.p_hat);
}

TEST_CASE("E_k is monotone in the density under the shared-seed coupling") {
  constexpr std::int64_t k = 30;
  std::vector<std::uint64_t> counts;
  for (double rho : {0.3, 0.6, 0.9, 1.2}) {
    McSettings mc;
    mc.trials = 300;
    mc.seed = 5;
    counts.push_back(ek_curve(1.0, poisson(rho), SleepMix{0.0}, {k}, mc)[0].p.successes);
  }
  for (std::size_t i = 1; i < counts.size(); ++i) CHECK(counts[i] <= counts[i - 1]);
  CHECK(counts.front() > counts.back());

  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto src = InstructionSource::random(mix::derive(110, t), Params{1.0});
    const auto lo = sample_configuration(poisson(0.5), SleepMix{0.0}, Interval{0, k + 1}, mix::derive(111, t));
    const auto hi = sample_configuration(poisson(1.0), SleepMix{0.0}, Interval{0, k + 1}, mix::derive(111, t));
    REQUIRE(config_leq(lo, hi));
    if (*event_ek(hi, src, k).holds) REQUIRE(*event_ek(lo, src, k).holds);
  }
}

TEST_CASE("fit_decay") {
  auto row = [](std::int64_t k, double p) {
    EkRow r;
    r.k = k;
    r.p.p_hat = p;
    return r;
  };
  SUBCASE("exact") {
    const auto f = fit_decay({row(10, 0.5 * std::exp(-1.0)), row(20, 0.5 * std::exp(-2.0)), row(30, 0.5 * std::exp(-3.0))});
    CHECK(f.c_hat == doctest::Approx(0.1));
    CHECK(f.C_hat == doctest::Approx(0.5));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(f.points == 3);
  }
  SUBCASE("constant") {
    const auto f = fit_decay({row(1, 0.8), row(2, 0.8), row(3, 0.8), row(4, 0.8)});
    CHECK(f.c_hat == doctest::Approx(0.0));
  }
  SUBCASE("zero rows are skipped") {
    const auto f = fit_decay({row(10, 0.3), row(20, 0.1), row(30, 0.0), row(40, 0.02)});
    CHECK(f.points == 3);
    CHECK(f.k_max == 40);
  }
  SUBCASE("noisy synthetic data") {
    constexpr double c = 0.04;
    constexpr double C = 0.7;
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::mt19937_64 rng(seed);
      std::vector<EkRow> table;
      for (std::int64_t k = 10; k <= 60; k += 10) {
        std::binomial_distribution<int> b(500, C * std::exp(-c * k));
        table.push_back(row(k, b(rng) / 500.0));
      }
      const auto f = fit_decay(table);
      covered += f.c_lo <= c && c <= f.c_hi;
    }
    CHECK(covered >= 17);
  }
  SUBCASE("errors") {
    CHECK_THROWS(fit_decay({row(1, 0), row(2, 0), row(3, 0)}));
    CHECK_THROWS(fit_decay({row(1, 0.5)}));
    CHECK_THROWS(fit_decay({}));
  }
}

TEST_CASE("bisection on a step statistic") {
  const auto step = [](double rho, int) { return make_proportion(rho < 0.7 ? 100 : 0, 100, 0); };
  const auto est = bisect_crossing(step, 0.05, 1.5, 0.01);
  CHECK(std::abs(est.rho_hat - 0.7) <= 0.01);
  CHECK(est.bracket_lo <= 0.7);
  CHECK(est.bracket_hi >= 0.7);
  CHECK_FALSE(est.flagged);
  CHECK_THROWS(bisect_crossing(step, 1.0, 0.5, 0.01));
  CHECK_THROWS(bisect_crossing(step, 0.1, 0.5, 0.0));
}

TEST_CASE("bisection flags a non-monotone statistic") {
  // Increasing in rho: every pair is ordered the wrong way.
  const auto bad = [](double rho, int) {
    const auto x = static_cast<std::uint64_t>(std::lround(std::min(1.0, rho) * 1000));
    return make_proportion(x, 1000, 0);
  };
  const auto est = bisect_crossing(bad, 0.05, 1.5, 0.01);
  CHECK(est.flagged);
  CHECK(est.bracket_lo <= est.rho_hat);
  CHECK(est.bracket_hi >= est.rho_hat);
}

TEST_CASE("critical density estimates") {
  McSettings mc;
  mc.trials = 400;
  mc.seed = 7;
  const auto mid = estimate_rho_c(1.0, 100, SleepMix{0.0}, 0.05, 1.5, 0.02, mc);
  MESSAGE("rho_c(1) = " << mid.rho_hat);
  CHECK(mid.rho_hat > 0.0);
  CHECK(mid.rho_hat < 1.0);
  const auto low = estimate_rho_c(0.5, 100, SleepMix{0.0}, 0.05, 1.5, 0.02, mc);
  const auto high = estimate_rho_c(2.0, 100, SleepMix{0.0}, 0.05, 1.5, 0.02, mc);
  MESSAGE("rho_c(0.5) = " << low.rho_hat << ", rho_c(2) = " << high.rho_hat);
  CHECK(low.bracket_lo <= high.bracket_hi);
  CHECK(low.rho_hat <= high.rho_hat);
}

TEST_CASE("cesaro examples") {
  std::vector<double> two(1000, 2.0);
  for (const auto& r : cesaro_check(two, {10, 100, 1000})) {
    CHECK(r.plain == doctest::Approx(2.0));
    CHECK(r.weighted == doctest::Approx((r.n + 1.0) / r.n));
  }
  std::vector<double> alt;
  for (int j = 1; j <= 2000; ++j) alt.push_back(j % 2 == 0 ? 1.0 : -1.0);
  for (const auto& r : cesaro_check(alt, {2000, 20, 200})) {
    const double m = r.n / 2.0;
    CHECK(r.plain == doctest::Approx(0.0));
    CHECK(r.weighted == doctest::Approx(m / (4 * m * m)));
  }
  std::vector<double> slow;
  for (int j = 1; j <= 100'000; ++j) slow.push_back(1.0 + 1.0 / std::sqrt(static_cast<double>(j)));
  const auto rows = cesaro_check(slow, {1000, 10'000, 100'000});
  CHECK(rows[0].n == 1000);
  double last = 1.0;
  for (const auto& r : rows) {
    const double err = std::abs(r.weighted - 0.5);
    CHECK(err < last);
    last = err;
    // Oracle: direct summation.
    double s = 0;
    for (int j = 1; j <= r.n; ++j) s += j * slow[static_cast<std::size_t>(j - 1)];
    CHECK(r.weighted == doctest::Approx(s / (static_cast<double>(r.n) * r.n)));
  }
  CHECK_THROWS(cesaro_check({}, {1}));
  CHECK_THROWS(cesaro_check(two, {1001}));
  CHECK_THROWS(cesaro_check(two, {0}));
}

TEST_CASE("explode and nucleate curves are deterministic") {
  McSettings mc;
  mc.trials = 30;
  mc.seed = 3;
  const auto a = explode_curve(1.0, poisson(1.2), SleepMix{1.0}, {20, 40}, mc);
  mc.workers = 2;
  const auto b = explode_curve(1.0, poisson(1.2), SleepMix{1.0}, {20, 40}, mc);
  REQUIRE(a.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a[i].reached_both == b[i].reached_both);
    CHECK(a[i].stabilized == b[i].stabilized);
    CHECK(a[i].reached_both + a[i].stabilized + a[i].p.capped == 30);
  }
  mc.trials = 10;
  const auto n1 = nucleate_curve(1.0, poisson(1.2), SleepMix{1.0}, 5, 40, mc);
  mc.workers = 1;
  const auto n2 = nucleate_curve(1.0, poisson(1.2), SleepMix{1.0}, 5, 40, mc);
  CHECK(n1.covered == n2.covered);
  CHECK(n1.p.successes == n2.p.successes);
  CHECK(n1.p.successes <= n1.covered);
}
