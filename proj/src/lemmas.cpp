#include "arw/lemmas.hpp"

#include <cmath>
#include <sstream>

#include "arw/experiments.hpp"
#include "arw/stabilizer.hpp"

namespace arw {

namespace {

double unit(std::uint64_t seed, std::uint64_t a, std::uint64_t b) { return mix::to_unit(mix::derive(seed, a, b)); }

std::uint64_t below(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t n) {
  return mix::derive(seed, a, b) % n;
}

Configuration random_sigma(std::uint64_t seed, const Interval& window) {
  std::vector<SiteState> states;
  for (Site x = window.lo; x <= window.hi; ++x) {
    const auto c = static_cast<std::int32_t>(below(seed, 1, mix::zigzag(x), 4));
    states.push_back(SiteState::from_count(c, unit(seed, 2, mix::zigzag(x)) < 0.5));
  }
  return Configuration(window.lo, std::move(states));
}

void note(SuiteResult& r, std::size_t i, const std::string& what) {
  ++r.violations;
  if (r.first_failure.empty()) r.first_failure = "instance " + std::to_string(i) + ": " + what;
}

}  // namespace

std::vector<Instance> generate_instances(std::uint64_t seed, std::size_t count, std::int64_t max_len) {
  static constexpr double kLambdas[] = {0.5, 1.0, 2.0};
  std::vector<Instance> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t s = mix::derive(seed, 0xa11ULL, i);
    const auto len = 1 + static_cast<std::int64_t>(below(s, 3, 0, static_cast<std::uint64_t>(max_len)));
    const auto lo = static_cast<Site>(below(s, 4, 0, 41)) - 20;
    Instance inst;
    inst.v = {lo, lo + len - 1};
    inst.sigma = random_sigma(s, {lo - 1, lo + len});
    inst.lambda = kLambdas[below(s, 5, 0, 3)];
    inst.source_seed = mix::derive(s, 6, 0);
    out.push_back(std::move(inst));
  }
  return out;
}

SuiteResult check_abelian(const std::vector<Instance>& instances, std::uint64_t cap) {
  SuiteResult r{"abelian", instances.size(), 0, 0, {}};
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& in = instances[i];
    const auto src = InstructionSource::random(in.source_seed, Params{in.lambda});
    const Policy policies[] = {Policy::fifo(), Policy::leftmost(), Policy::rightmost(),
                               Policy::random_queue(mix::derive(in.source_seed, 7))};
    const StabilizeReport ref = stabilize(in.sigma, src, in.v, policies[0], cap);
    if (ref.capped) {
      ++r.capped;
      continue;
    }
    for (std::size_t p = 1; p < 4; ++p) {
      const StabilizeReport rep = stabilize(in.sigma, src, in.v, policies[p], cap);
      if (rep.capped) {
        ++r.capped;
      } else if (!(rep.odometer == ref.odometer) || !(rep.final == ref.final) || rep.visited != ref.visited) {
        note(r, i, "policy " + std::to_string(p) + " disagrees with fifo");
      }
    }
  }
  return r;
}

SuiteResult check_preemptive(const std::vector<Instance>& instances, std::uint64_t cap) {
  SuiteResult r{"preemptive", instances.size(), 0, 0, {}};
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& in = instances[i];
    const auto src = InstructionSource::random(in.source_seed, Params{in.lambda});
    const StabilizeReport base = stabilize(in.sigma, src, in.v, Policy::fifo(), cap);
    const StabilizeReport woken = stabilize(wake(in.sigma, base.visited), src, in.v, Policy::fifo(), cap);
    if (base.capped || woken.capped) {
      ++r.capped;
    } else if (!(base.odometer == woken.odometer)) {
      note(r, i, "odometer changed after waking the visited set");
    }
  }
  return r;
}

SuiteResult check_monotonicity(const std::vector<Instance>& instances, std::uint64_t seed, std::uint64_t cap) {
  SuiteResult r{"monotonicity", instances.size(), 0, 0, {}};
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& in = instances[i];
    const auto src = InstructionSource::random(in.source_seed, Params{in.lambda});
    std::vector<Site> u1;
    std::vector<Site> u2;
    for (Site x = in.v.lo; x <= in.v.hi; ++x) {
      const double u = unit(seed, i, mix::zigzag(x));
      if (u < 0.3) u1.push_back(x);
      if (u < 0.6) u2.push_back(x);
    }
    const StabilizeReport a = stabilize(wake(in.sigma, u1), src, in.v, Policy::fifo(), cap);
    const StabilizeReport b = stabilize(wake(in.sigma, u2), src, in.v, Policy::fifo(), cap);
    if (a.capped || b.capped) {
      ++r.capped;
    } else if (!odometer_leq(a.odometer, b.odometer)) {
      note(r, i, "odometer of the smaller wake set is not dominated");
    }
  }
  return r;
}

SuiteResult check_window_growth(std::uint64_t seed, std::size_t count, std::uint64_t cap) {
  static constexpr double kLambdas[] = {0.5, 1.0, 2.0};
  SuiteResult r{"window-growth", count, 0, 0, {}};
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t s = mix::derive(seed, 0x960ULL, i);
    const auto len1 = 1 + static_cast<std::int64_t>(below(s, 1, 0, 20));
    const auto grow2 = static_cast<std::int64_t>(below(s, 2, 0, 10));
    const auto grow3 = static_cast<std::int64_t>(below(s, 3, 0, 10));
    const Interval v1{0, len1 - 1};
    const Interval v2{v1.lo - grow2 / 2 - 1, v1.hi + (grow2 - grow2 / 2)};
    const Interval v3{v2.lo - grow3, v2.hi + grow3 / 2 + 1};
    const Configuration sigma = random_sigma(s, {v3.lo - 1, v3.hi + 1});
    const auto src = InstructionSource::random(mix::derive(s, 4), Params{kLambdas[below(s, 5, 0, 3)]});
    const StabilizeReport a = stabilize(sigma, src, v1, Policy::fifo(), cap);
    const StabilizeReport b = stabilize(sigma, src, v2, Policy::fifo(), cap);
    const StabilizeReport c = stabilize(sigma, src, v3, Policy::fifo(), cap);
    if (a.capped || b.capped || c.capped) {
      ++r.capped;
    } else if (!odometer_leq(a.odometer, b.odometer) || !odometer_leq(b.odometer, c.odometer)) {
      note(r, i, "odometer decreased when the region grew");
    }
  }
  return r;
}

SuiteResult check_cesaro() {
  constexpr std::int64_t n = 100'000;
  struct Family {
    const char* name;
    double rho;
    double tol;
    double (*a)(std::int64_t);
  };
  const Family families[] = {
      {"constant", 2.0, 2e-2, [](std::int64_t) { return 2.0; }},
      {"alternating", 0.0, 2e-2, [](std::int64_t j) { return j % 2 == 0 ? 1.0 : -1.0; }},
      {"inverse-sqrt", 1.0, 1e-1, [](std::int64_t j) { return 1.0 + 1.0 / std::sqrt(static_cast<double>(j)); }},
  };
  SuiteResult r{"cesaro", 3, 0, 0, {}};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& f = families[i];
    std::vector<double> seq(n);
    for (std::int64_t j = 1; j <= n; ++j) seq[static_cast<std::size_t>(j - 1)] = f.a(j);
    const auto rows = cesaro_check(seq, {n});
    const double err = std::abs(rows[0].weighted - f.rho / 2);
    if (!(err < f.tol)) {
      std::ostringstream os;
      os << f.name << " family: |weighted - rho/2| = " << err;
      note(r, i, os.str());
    }
  }
  return r;
}

}  // namespace arw
