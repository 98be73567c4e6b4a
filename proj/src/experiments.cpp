#include "arw/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "arw/parallel.hpp"

namespace arw {

namespace {

ScanResult scan(const Configuration& sigma, const InstructionSource& source, std::int64_t n, std::int64_t K,
                std::uint64_t cap, const Odometer* offsets, Side side) {
  if (n < 1 || K < n) throw std::invalid_argument("scan needs 1 <= n <= K");
  const Interval need = side == Side::Right ? Interval{0, K + 1} : Interval{-K - 1, 0};
  if (!sigma.window().contains(need)) throw WindowOverflow("scan needs the window to cover [0, K+1] (mirrored on the left)");

  ScanResult res;
  res.side = side;
  res.n = n;
  res.K = K;
  const Interval beyond = side == Side::Right ? Interval{n + 1, sigma.hi()} : Interval{sigma.lo(), -n - 1};
  res.witness_exact = is_stable(sigma, beyond);
  for (std::int64_t k = n; k <= K; ++k) {
    const EkOutcome ek = event_ek(sigma, source, k, cap, side, offsets);
    res.reports.push_back({k, ek.holds, ek.report.topplings});
    if (!ek.holds) {
      res.capped = true;
      break;
    }
    if (*ek.holds) {
      res.found_k = k;
      break;
    }
  }
  return res;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t grid_index, std::uint64_t trial, unsigned stream) {
  return mix::derive(seed, grid_index, 2 * trial + stream);
}

}  // namespace

ScanResult x_scan(const Configuration& sigma, const InstructionSource& source, std::int64_t n, std::int64_t K,
                  std::uint64_t cap, const Odometer* offsets) {
  return scan(sigma, source, n, K, cap, offsets, Side::Right);
}

ScanResult y_scan(const Configuration& sigma, const InstructionSource& source, std::int64_t n, std::int64_t K,
                  std::uint64_t cap, const Odometer* offsets) {
  return scan(sigma, source, n, K, cap, offsets, Side::Left);
}

NucleationReport nucleation_trial(const Configuration& sigma, const InstructionSource& source, std::int64_t m,
                                  std::int64_t K, std::uint64_t cap) {
  if (m < 1 || K < m) throw std::invalid_argument("nucleation trial needs 1 <= m <= K");
  if (!sigma.window().contains(Interval{-K - 1, K + 1})) {
    throw WindowOverflow("nucleation trial needs the window to cover [-K-1, K+1]");
  }
  if (!sigma.at(0).is_active()) throw IllegalTopple("nucleation trial needs an active particle at the origin");

  StabilizeOptions opt;
  opt.ignite = 0;
  const Interval region{sigma.lo() + 1, sigma.hi() - 1};
  StabilizeReport exc = stabilize(sigma, source, region, Policy::fifo(), cap, opt);

  NucleationReport rep;
  rep.m = m;
  rep.capped = exc.capped;
  rep.u0 = std::move(exc.odometer);
  if (!exc.visited.empty()) rep.v0 = {exc.visited.front(), exc.visited.back()};
  rep.covered = rep.v0.contains(Interval{-m, m});
  if (rep.covered && !rep.capped) {
    rep.right_scan = x_scan(sigma, source, m, K, cap, &rep.u0);
    rep.left_scan = y_scan(sigma, source, m, K, cap, &rep.u0);
  }
  return rep;
}

TrialOutcome reach_trial(const Configuration& sigma, const InstructionSource& source, std::int64_t R,
                         std::uint64_t cap) {
  if (R < 1) throw std::invalid_argument("reach trial needs R >= 1");
  StabilizeOptions opt;
  opt.stop_when_visited = {-R, R};
  const StabilizeReport rep = stabilize(sigma, source, Interval{-R, R}, Policy::fifo(), cap, opt);
  TrialOutcome out;
  if (!rep.visited.empty()) {
    out.max_right = std::max<std::int64_t>(0, rep.visited.back());
    out.max_left = std::max<std::int64_t>(0, -rep.visited.front());
  }
  if (rep.stopped_early) {
    out.kind = TrialKind::ReachedBoth;
  } else if (rep.capped) {
    out.kind = TrialKind::Capped;
  } else {
    out.kind = TrialKind::Stabilized;
  }
  return out;
}

std::optional<Configuration> sample_ignited(const EnvSpec& spec, const SleepMix& mix, std::int64_t half,
                                            std::uint64_t seed) {
  if (half < 1) throw std::invalid_argument("sample_ignited needs half >= 1");
  const std::int64_t margin = half;
  const Configuration wide = sample_configuration(spec, mix, Interval{-half - margin, half + margin}, seed);
  const bool prefer_left = (mix::derive(seed, 0x7e1ULL) & 1U) != 0;
  for (std::int64_t d = 0; d <= margin; ++d) {
    const std::int64_t first = prefer_left ? -d : d;
    for (std::int64_t x : {first, -first}) {
      if (wide.at(x).is_empty()) continue;
      Configuration cfg = wide.slice(x - half, x + half).shifted(x);
      const Site origin = 0;
      return wake(cfg, std::span<const Site>(&origin, 1));
    }
  }
  return std::nullopt;
}

ProportionRow make_proportion(std::uint64_t successes, std::uint64_t trials, std::uint64_t capped) {
  ProportionRow row;
  row.trials = trials;
  row.successes = successes;
  row.capped = capped;
  const std::uint64_t n = trials - capped;
  row.p_hat = n == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(n);
  row.ci = stats::clopper_pearson(successes, n);
  return row;
}

std::vector<EkRow> ek_curve(double lambda, const EnvSpec& spec, const SleepMix& mix,
                            const std::vector<std::int64_t>& k_grid, const McSettings& mc) {
  if (mc.trials < 1) throw std::invalid_argument("ek_curve needs at least one trial");
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (k_grid[i] < 1 || (i > 0 && k_grid[i] <= k_grid[i - 1])) {
      throw std::invalid_argument("k grid must be positive and increasing");
    }
  }
  std::vector<EkRow> rows;
  for (std::size_t gi = 0; gi < k_grid.size(); ++gi) {
    const std::int64_t k = k_grid[gi];
    // 0 = E_k fails, 1 = holds, 2 = capped
    std::vector<std::uint8_t> res(mc.trials);
    parallel_for(mc.trials, mc.workers, [&](std::size_t t) {
      const Configuration sigma = sample_configuration(spec, mix, Interval{0, k + 1}, trial_seed(mc.seed, gi, t, 0));
      const auto source = InstructionSource::random(trial_seed(mc.seed, gi, t, 1), Params{lambda});
      const EkOutcome ek = event_ek(sigma, source, k, mc.cap);
      res[t] = !ek.holds ? 2 : (*ek.holds ? 1 : 0);
    });
    const auto succ = static_cast<std::uint64_t>(std::count(res.begin(), res.end(), 1));
    const auto capped = static_cast<std::uint64_t>(std::count(res.begin(), res.end(), 2));
    rows.push_back({k, make_proportion(succ, mc.trials, capped)});
  }
  return rows;
}

std::vector<ExplodeRow> explode_curve(double lambda, const EnvSpec& spec, const SleepMix& mix,
                                      const std::vector<std::int64_t>& r_grid, const McSettings& mc) {
  std::vector<ExplodeRow> rows;
  for (std::size_t gi = 0; gi < r_grid.size(); ++gi) {
    const std::int64_t R = r_grid[gi];
    if (R < 1) throw std::invalid_argument("R values must be positive");
    std::vector<TrialKind> res(mc.trials);
    parallel_for(mc.trials, mc.workers, [&](std::size_t t) {
      const auto sigma = sample_ignited(spec, mix, R + 1, trial_seed(mc.seed, gi, t, 0));
      if (!sigma) {
        res[t] = TrialKind::Stabilized;
        return;
      }
      const auto source = InstructionSource::random(trial_seed(mc.seed, gi, t, 1), Params{lambda});
      res[t] = reach_trial(*sigma, source, R, mc.cap).kind;
    });
    ExplodeRow row;
    row.R = R;
    row.reached_both = static_cast<std::uint64_t>(std::count(res.begin(), res.end(), TrialKind::ReachedBoth));
    row.stabilized = static_cast<std::uint64_t>(std::count(res.begin(), res.end(), TrialKind::Stabilized));
    const auto capped = static_cast<std::uint64_t>(std::count(res.begin(), res.end(), TrialKind::Capped));
    row.p = make_proportion(row.reached_both, mc.trials, capped);
    rows.push_back(row);
  }
  return rows;
}

NucleateRow nucleate_curve(double lambda, const EnvSpec& spec, const SleepMix& mix, std::int64_t m, std::int64_t K,
                           const McSettings& mc) {
  // 0 uncovered, 1 covered but a scan found E_k, 2 success, 3 capped
  std::vector<std::uint8_t> res(mc.trials);
  parallel_for(mc.trials, mc.workers, [&](std::size_t t) {
    const auto sigma = sample_ignited(spec, mix, K + 1, trial_seed(mc.seed, 0, t, 0));
    if (!sigma) {
      res[t] = 0;
      return;
    }
    const auto source = InstructionSource::random(trial_seed(mc.seed, 0, t, 1), Params{lambda});
    const NucleationReport rep = nucleation_trial(*sigma, source, m, K, mc.cap);
    const bool scan_capped = (rep.right_scan && rep.right_scan->capped) || (rep.left_scan && rep.left_scan->capped);
    if (rep.capped || scan_capped) {
      res[t] = 3;
    } else if (rep.success()) {
      res[t] = 2;
    } else {
      res[t] = rep.covered ? 1 : 0;
    }
  });
  NucleateRow row;
  row.m = m;
  row.K = K;
  const auto succ = static_cast<std::uint64_t>(std::count(res.begin(), res.end(), 2));
  row.covered = succ + static_cast<std::uint64_t>(std::count(res.begin(), res.end(), 1));
  row.p = make_proportion(succ, mc.trials, static_cast<std::uint64_t>(std::count(res.begin(), res.end(), 3)));
  return row;
}

DecayFit fit_decay(const std::vector<EkRow>& table) {
  std::vector<double> ks;
  std::vector<double> logs;
  for (const auto& row : table) {
    if (row.p.p_hat > 0.0) {
      ks.push_back(static_cast<double>(row.k));
      logs.push_back(std::log(row.p.p_hat));
    }
  }
  if (ks.size() < 3) throw std::invalid_argument("fit_decay needs at least three points with p_hat > 0");
  const stats::LinearFit f = stats::least_squares(ks, logs);
  DecayFit d;
  d.c_hat = -f.slope;
  d.C_hat = std::exp(f.intercept);
  d.r_squared = f.r_squared;
  d.c_se = f.slope_se;
  const double half = stats::t_quantile(static_cast<double>(ks.size() - 2)) * f.slope_se;
  d.c_lo = d.c_hat - half;
  d.c_hi = d.c_hat + half;
  d.k_min = static_cast<std::int64_t>(ks.front());
  d.k_max = static_cast<std::int64_t>(ks.back());
  d.points = ks.size();
  return d;
}

RhoEstimate bisect_crossing(const CrossingStatistic& stat, double rho_lo, double rho_hi, double tol) {
  if (!(rho_lo < rho_hi)) throw std::invalid_argument("bisection needs rho_lo < rho_hi");
  if (!(tol > 0.0)) throw std::invalid_argument("bisection needs tol > 0");
  RhoEstimate est;
  double lo = rho_lo;
  double hi = rho_hi;
  for (int iter = 0; hi - lo > tol && iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const ProportionRow p = stat(mid, iter);
    est.iterations.push_back({iter, lo, hi, mid, p});
    if (p.p_hat >= 0.5) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  est.rho_hat = 0.5 * (lo + hi);
  est.bracket_lo = lo;
  est.bracket_hi = hi;

  // The statistic should be non-increasing in rho. A pair ordered the
  // other way with disjoint intervals means the crossing is not resolved
  // at this noise level: widen to every point whose interval covers 1/2.
  const auto& it = est.iterations;
  for (std::size_t a = 0; a < it.size(); ++a) {
    for (std::size_t b = 0; b < it.size(); ++b) {
      if (it[a].rho_mid < it[b].rho_mid && it[a].p.ci.hi < it[b].p.ci.lo) est.flagged = true;
    }
  }
  if (est.flagged) {
    for (const auto& row : it) {
      if (row.p.ci.lo <= 0.5 && 0.5 <= row.p.ci.hi) {
        est.bracket_lo = std::min(est.bracket_lo, row.rho_mid);
        est.bracket_hi = std::max(est.bracket_hi, row.rho_mid);
      }
    }
  }
  return est;
}

RhoEstimate estimate_rho_c(double lambda, std::int64_t k, const SleepMix& mix, double rho_lo, double rho_hi,
                           double tol, const McSettings& mc) {
  if (k < 1) throw std::invalid_argument("estimate_rho_c needs k >= 1");
  if (!(rho_lo > 0.0)) throw std::invalid_argument("estimate_rho_c needs rho_lo > 0");
  auto stat = [&](double rho, int) {
    const EnvSpec spec = EnvSpec::iid(Marginal::poisson(rho));
    std::vector<std::uint8_t> res(mc.trials);
    parallel_for(mc.trials, mc.workers, [&](std::size_t t) {
      // Shared across rho: common random numbers give a monotone coupling.
      const Configuration sigma = sample_configuration(spec, mix, Interval{0, k + 1}, trial_seed(mc.seed, 0, t, 0));
      const auto source = InstructionSource::random(trial_seed(mc.seed, 0, t, 1), Params{lambda});
      const EkOutcome ek = event_ek(sigma, source, k, mc.cap);
      res[t] = !ek.holds ? 2 : (*ek.holds ? 1 : 0);
    });
    return make_proportion(static_cast<std::uint64_t>(std::count(res.begin(), res.end(), 1)), mc.trials,
                           static_cast<std::uint64_t>(std::count(res.begin(), res.end(), 2)));
  };
  return bisect_crossing(stat, rho_lo, rho_hi, tol);
}

std::vector<CesaroRow> cesaro_check(const std::vector<double>& sequence, const std::vector<std::int64_t>& n_list) {
  if (sequence.empty()) throw std::invalid_argument("cesaro_check needs a non-empty sequence");
  std::vector<CesaroRow> rows;
  for (const std::int64_t n : n_list) {
    if (n < 1 || static_cast<std::size_t>(n) > sequence.size()) {
      throw std::invalid_argument("cesaro_check: n outside the sequence");
    }
  }
  // One pass with running sums; n_list may be in any order.
  std::vector<std::int64_t> order(n_list.begin(), n_list.end());
  std::sort(order.begin(), order.end());
  std::vector<CesaroRow> sorted;
  long double plain = 0.0L;
  long double weighted = 0.0L;
  std::size_t next = 0;
  for (std::int64_t j = 1; next < order.size(); ++j) {
    plain += sequence[static_cast<std::size_t>(j - 1)];
    weighted += static_cast<long double>(j) * sequence[static_cast<std::size_t>(j - 1)];
    while (next < order.size() && order[next] == j) {
      const long double n = static_cast<long double>(j);
      sorted.push_back({j, static_cast<double>(plain / n), static_cast<double>(weighted / (n * n))});
      ++next;
    }
  }
  for (const std::int64_t n : n_list) {
    rows.push_back(*std::find_if(sorted.begin(), sorted.end(), [&](const CesaroRow& r) { return r.n == n; }));
  }
  return rows;
}

}  // namespace arw
