#pragma once

// Probe experiments built on exact finite-volume events: half-line scans
// through E_k, the nucleation trial, reach trials, E_k decay curves, a
// bisection estimator for the critical density, and the Cesaro checker.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "arw/initdist.hpp"
#include "arw/stabilizer.hpp"
#include "arw/stats.hpp"

namespace arw {

// ---------------------------------------------------------------- scans

struct EkSummary {
  std::int64_t k = 0;
  std::optional<bool> holds;
  std::uint64_t topplings = 0;
};

/// First k in [n, K] for which E_k holds, or censored.
///
/// A found k witnesses X(n, sigma) <= k + 1 (Y(n, sigma) >= -k - 1 on the
/// left) when sigma has no active particle beyond n on the scanned side;
/// `witness_exact` records whether that held. Censored means no E_k up to
/// K, which is all a finite scan can say about X = infinity.
struct ScanResult {
  Side side = Side::Right;
  std::int64_t n = 0;
  std::int64_t K = 0;
  std::optional<std::int64_t> found_k;
  bool capped = false;
  bool witness_exact = true;
  std::vector<EkSummary> reports;

  bool censored() const { return !found_k && !capped; }
};

/// `offsets` gives a midstream start (instructions at x begin at index
/// offsets(x)); sigma is used as given.
ScanResult x_scan(const Configuration& sigma, const InstructionSource& source, std::int64_t n, std::int64_t K,
                  std::uint64_t cap = kDefaultCap, const Odometer* offsets = nullptr);
ScanResult y_scan(const Configuration& sigma, const InstructionSource& source, std::int64_t n, std::int64_t K,
                  std::uint64_t cap = kDefaultCap, const Odometer* offsets = nullptr);

// ----------------------------------------------------------- nucleation

struct NucleationReport {
  /// Sites toppled by the initial excursion; u0 > 0 exactly here.
  Interval v0;
  Odometer u0;
  std::int64_t m = 0;
  bool covered = false;  // v0 contains [-m, m]
  bool capped = false;
  std::optional<ScanResult> right_scan;
  std::optional<ScanResult> left_scan;

  bool success() const {
    return covered && !capped && right_scan && left_scan && right_scan->censored() && left_scan->censored();
  }
};

/// Excursion from the origin followed by midstream half-line scans.
///
/// The excursion topples, starting at 0, only sites that the moving mass
/// has reached, until those sites are stable; particles it wakes join it.
/// The window of sigma bounds the excursion (its edge sites are absorbing).
NucleationReport nucleation_trial(const Configuration& sigma, const InstructionSource& source, std::int64_t m,
                                  std::int64_t K, std::uint64_t cap = kDefaultCap);

// ---------------------------------------------------------- reach trial

enum class TrialKind : std::uint8_t { Stabilized, ReachedBoth, Capped };

struct TrialOutcome {
  TrialKind kind = TrialKind::Stabilized;
  std::int64_t max_right = 0;  // farthest visited site to the right of 0
  std::int64_t max_left = 0;   // farthest visited distance to the left of 0
};

/// Stabilizes on [-R, R], stopping once both -R and R have been toppled.
TrialOutcome reach_trial(const Configuration& sigma, const InstructionSource& source, std::int64_t R,
                         std::uint64_t cap = kDefaultCap);

/// Samples a configuration on [-half, half], shifted so that the nonvacant
/// site nearest the origin sits at 0, then wakes site 0. Returns nullopt if
/// no particle lies within reach of the sampler's margin.
std::optional<Configuration> sample_ignited(const EnvSpec& spec, const SleepMix& mix, std::int64_t half,
                                            std::uint64_t seed);

// ----------------------------------------------------- Monte Carlo runs

struct ProportionRow {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  std::uint64_t capped = 0;
  double p_hat = 0.0;
  stats::Interval95 ci;
};

/// Estimate from the non-capped trials.
ProportionRow make_proportion(std::uint64_t successes, std::uint64_t trials, std::uint64_t capped);

struct EkRow {
  std::int64_t k = 0;
  ProportionRow p;
};

struct McSettings {
  std::uint64_t trials = 500;
  std::uint64_t seed = 1;
  std::uint64_t cap = kDefaultCap;
  unsigned workers = 1;
};

/// P(E_k) on a grid of k. Each trial draws sigma on [0, k + 1] from
/// (spec, mix) and a fresh random source.
std::vector<EkRow> ek_curve(double lambda, const EnvSpec& spec, const SleepMix& mix,
                            const std::vector<std::int64_t>& k_grid, const McSettings& mc);

struct ExplodeRow {
  std::int64_t R = 0;
  std::uint64_t reached_both = 0;
  std::uint64_t stabilized = 0;
  ProportionRow p;  // of ReachedBoth
};

/// Reach trials from sample_ignited configurations.
std::vector<ExplodeRow> explode_curve(double lambda, const EnvSpec& spec, const SleepMix& mix,
                                      const std::vector<std::int64_t>& r_grid, const McSettings& mc);

struct NucleateRow {
  std::int64_t m = 0;
  std::int64_t K = 0;
  std::uint64_t covered = 0;
  ProportionRow p;  // of success
};

NucleateRow nucleate_curve(double lambda, const EnvSpec& spec, const SleepMix& mix, std::int64_t m, std::int64_t K,
                           const McSettings& mc);

// ---------------------------------------------------------- decay fit

struct DecayFit {
  double c_hat = 0.0;
  double C_hat = 0.0;
  double r_squared = 0.0;
  double c_se = 0.0;
  /// 95% band for c from the regression slope.
  double c_lo = 0.0;
  double c_hi = 0.0;
  std::int64_t k_min = 0;
  std::int64_t k_max = 0;
  std::size_t points = 0;
};

/// Least-squares fit of log p_hat = log C - c k over rows with p_hat > 0.
DecayFit fit_decay(const std::vector<EkRow>& table);

// ------------------------------------------------------ rho_c estimate

struct RhoIteration {
  int iter = 0;
  double rho_lo = 0.0;
  double rho_hi = 0.0;
  double rho_mid = 0.0;
  ProportionRow p;
};

struct RhoEstimate {
  double rho_hat = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  /// Some pair of evaluated densities ordered their estimates the wrong way
  /// beyond confidence-interval overlap; the bracket was widened.
  bool flagged = false;
  std::vector<RhoIteration> iterations;
};

/// Statistic used by the bisection: (successes, trials, capped) at density rho.
using CrossingStatistic = std::function<ProportionRow(double rho, int iter)>;

/// Bisects on rho for the point where the statistic crosses 1/2 from above.
RhoEstimate bisect_crossing(const CrossingStatistic& stat, double rho_lo, double rho_hi, double tol);

/// Bisection on P(E_k) for i.i.d. Poisson(rho) initial laws. Trials share
/// their uniforms across rho, so sigma grows monotonically with rho.
RhoEstimate estimate_rho_c(double lambda, std::int64_t k, const SleepMix& mix, double rho_lo, double rho_hi,
                           double tol, const McSettings& mc);

// --------------------------------------------------------- averages

struct CesaroRow {
  std::int64_t n = 0;
  double plain = 0.0;     // (1/n) sum a_j
  double weighted = 0.0;  // (1/n^2) sum j a_j
};

/// Both averages for each n; a_1 is sequence[0].
std::vector<CesaroRow> cesaro_check(const std::vector<double>& sequence, const std::vector<std::int64_t>& n_list);

}  // namespace arw
