#pragma once

// Initial laws for ARW on a window and the density functionals that enter
// the explosivity hypotheses.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "arw/core.hpp"

namespace arw {

/// One-site particle count law.
class Marginal {
 public:
  struct Finite {
    std::vector<std::pair<std::int32_t, double>> support;
  };
  struct Poisson {
    double rho = 1.0;
    std::int32_t truncation = 30;
  };

  static Marginal finite(std::vector<std::pair<std::int32_t, double>> support);
  /// Truncated at `truncation` and renormalized.
  static Marginal poisson(double rho, std::int32_t truncation = 30);

  std::int32_t sample(double u) const;
  double mean() const;
  double variance() const;
  const std::variant<Finite, Poisson>& variant() const { return spec_; }

 private:
  explicit Marginal(std::variant<Finite, Poisson> spec);

  std::variant<Finite, Poisson> spec_;
  std::vector<std::int32_t> values_;
  std::vector<double> cdf_;
};

/// Ergodic law of the particle counts on Z.
struct EnvSpec {
  struct Iid {
    Marginal marginal;
  };
  /// Counts modulated by a stationary finite Markov chain run left to right.
  struct MarkovMod {
    std::vector<std::vector<double>> transition;
    std::vector<Marginal> marginals;
  };
  /// A fixed pattern repeated periodically with a uniform random phase.
  struct PeriodicPhase {
    std::vector<std::int32_t> pattern;
  };

  std::variant<Iid, MarkovMod, PeriodicPhase> law;

  static EnvSpec iid(Marginal m) { return {Iid{std::move(m)}}; }
  static EnvSpec markov(std::vector<std::vector<double>> transition, std::vector<Marginal> marginals);
  static EnvSpec periodic(std::vector<std::int32_t> pattern);

  /// E|sigma(0)|.
  double density() const;
};

/// Probability that a lone particle starts asleep.
struct SleepMix {
  double q = 1.0;
};

/// Throws std::invalid_argument describing the first problem found.
void validate(const EnvSpec& spec);

/// Stationary law of an irreducible aperiodic chain.
std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& transition);

/// Deterministic in (spec, mix, window, seed).
Configuration sample_configuration(const EnvSpec& spec, const SleepMix& mix, const Interval& window,
                                   std::uint64_t seed);

/// (1/n) sum_{j=1..n} |sigma(j)|, or over [-n, -1] when mirrored.
double empirical_density(const Configuration& config, std::int64_t n, bool mirrored = false);

/// (1/n^2) sum_{j=1..n} j |sigma(j)|.
double weighted_profile(const Configuration& config, std::int64_t n);

struct HypothesisRow {
  std::int64_t n = 0;
  bool center_of_mass = false;  // sum j|sigma(j)| >= (rho_c + eps) n^2 / 2
  bool max_density = false;     // sum |sigma(j)| <= beta n
};

std::vector<HypothesisRow> hypothesis_check(const Configuration& config, std::int64_t N, std::int64_t n_max,
                                            double eps, double beta, double rho_c_ref);

// Flat key=value law descriptions, e.g.
//   kind=iid-poisson rho=1.2
//   kind=iid-finite support=0:0.5,2:0.5
//   kind=markov transition=0.9,0.1;0.1,0.9 marginals=poisson:0.6;poisson:1.8
//   kind=periodic pattern=1,1,1,1,2
EnvSpec parse_env_spec(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> env_spec_to_kv(const EnvSpec& spec);

}  // namespace arw
