#include "arw/initdist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace arw {

namespace {

constexpr double kProbTol = 1e-12;

// Independent uniform streams per (seed, site, channel).
double uniform(std::uint64_t seed, Site x, std::uint64_t channel) {
  return mix::to_unit(mix::hash3(mix::derive(seed, 0x1d1ULL, channel), x, 0));
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("key '" + key + "': '" + s + "' is not a number");
  }
}

std::int32_t to_int(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return static_cast<std::int32_t>(v);
  } catch (const std::exception&) {
    throw std::invalid_argument("key '" + key + "': '" + s + "' is not an integer");
  }
}

Marginal parse_marginal(const std::string& key, const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = trim(text.substr(0, colon));
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "poisson") {
    const auto parts = split(rest, ':');
    if (parts.empty() || parts.size() > 2) throw std::invalid_argument("key '" + key + "': expected poisson:<rho>[:<truncation>]");
    const double rho = to_double(key, trim(parts[0]));
    const std::int32_t trunc = parts.size() == 2 ? to_int(key, trim(parts[1])) : 30;
    return Marginal::poisson(rho, trunc);
  }
  if (kind == "finite") {
    std::vector<std::pair<std::int32_t, double>> support;
    for (const auto& item : split(rest, ',')) {
      const auto parts = split(item, ':');
      if (parts.size() != 2) throw std::invalid_argument("key '" + key + "': expected count:prob pairs");
      support.emplace_back(to_int(key, trim(parts[0])), to_double(key, trim(parts[1])));
    }
    return Marginal::finite(std::move(support));
  }
  throw std::invalid_argument("key '" + key + "': unknown marginal kind '" + kind + "'");
}

std::string format_marginal(const Marginal& m) {
  if (const auto* p = std::get_if<Marginal::Poisson>(&m.variant())) {
    return "poisson:" + fmt_double(p->rho) + ":" + std::to_string(p->truncation);
  }
  std::string out = "finite:";
  const auto& f = std::get<Marginal::Finite>(m.variant());
  for (std::size_t i = 0; i < f.support.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(f.support[i].first) + ":" + fmt_double(f.support[i].second);
  }
  return out;
}

}  // namespace

Marginal::Marginal(std::variant<Finite, Poisson> spec) : spec_(std::move(spec)) {
  std::vector<double> probs;
  if (const auto* f = std::get_if<Finite>(&spec_)) {
    if (f->support.empty()) throw std::invalid_argument("finite marginal needs a non-empty support");
    double total = 0.0;
    for (const auto& [count, p] : f->support) {
      if (count < 0) throw std::invalid_argument("finite marginal: negative particle count");
      if (!(p >= 0.0)) throw std::invalid_argument("finite marginal: negative probability");
      values_.push_back(count);
      probs.push_back(p);
      total += p;
    }
    if (std::abs(total - 1.0) > kProbTol) throw std::invalid_argument("finite marginal: probabilities must sum to 1");
  } else {
    const auto& p = std::get<Poisson>(spec_);
    if (!(p.rho > 0.0) || !std::isfinite(p.rho)) throw std::invalid_argument("poisson marginal: rho must be positive");
    if (p.truncation < 20) throw std::invalid_argument("poisson marginal: truncation must be at least 20");
    double term = std::exp(-p.rho);
    for (std::int32_t k = 0; k <= p.truncation; ++k) {
      values_.push_back(k);
      probs.push_back(term);
      term *= p.rho / (k + 1);
    }
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  double acc = 0.0;
  for (double p : probs) {
    acc += p / total;
    cdf_.push_back(acc);
  }
  cdf_.back() = 1.0;
}

Marginal Marginal::finite(std::vector<std::pair<std::int32_t, double>> support) {
  return Marginal(Finite{std::move(support)});
}

Marginal Marginal::poisson(double rho, std::int32_t truncation) { return Marginal(Poisson{rho, truncation}); }

std::int32_t Marginal::sample(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), values_.size() - 1);
  return values_[i];
}

double Marginal::mean() const {
  double m = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    m += values_[i] * (cdf_[i] - prev);
    prev = cdf_[i];
  }
  return m;
}

double Marginal::variance() const {
  const double mu = mean();
  double v = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    v += (values_[i] - mu) * (values_[i] - mu) * (cdf_[i] - prev);
    prev = cdf_[i];
  }
  return v;
}

EnvSpec EnvSpec::markov(std::vector<std::vector<double>> transition, std::vector<Marginal> marginals) {
  EnvSpec s{MarkovMod{std::move(transition), std::move(marginals)}};
  validate(s);
  return s;
}

EnvSpec EnvSpec::periodic(std::vector<std::int32_t> pattern) {
  EnvSpec s{PeriodicPhase{std::move(pattern)}};
  validate(s);
  return s;
}

double EnvSpec::density() const {
  if (const auto* iid = std::get_if<Iid>(&law)) return iid->marginal.mean();
  if (const auto* mk = std::get_if<MarkovMod>(&law)) {
    const auto pi = stationary_distribution(mk->transition);
    double d = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) d += pi[i] * mk->marginals[i].mean();
    return d;
  }
  const auto& pat = std::get<PeriodicPhase>(law).pattern;
  return static_cast<double>(std::accumulate(pat.begin(), pat.end(), std::int64_t{0})) /
         static_cast<double>(pat.size());
}

void validate(const EnvSpec& spec) {
  if (const auto* mk = std::get_if<EnvSpec::MarkovMod>(&spec.law)) {
    const std::size_t m = mk->transition.size();
    if (m == 0) throw std::invalid_argument("markov law: empty transition matrix");
    if (mk->marginals.size() != m) throw std::invalid_argument("markov law: need one marginal per hidden state");
    for (const auto& row : mk->transition) {
      if (row.size() != m) throw std::invalid_argument("markov law: transition matrix must be square");
      double s = 0.0;
      for (double p : row) {
        if (!(p >= 0.0)) throw std::invalid_argument("markov law: negative transition probability");
        s += p;
      }
      if (std::abs(s - 1.0) > kProbTol) throw std::invalid_argument("markov law: transition rows must sum to 1");
    }
    // Primitive (irreducible and aperiodic) iff some power up to
    // (m-1)^2 + 1 is strictly positive.
    std::vector<std::vector<char>> reach(m, std::vector<char>(m, 0));
    std::vector<std::vector<char>> base(m, std::vector<char>(m, 0));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) base[i][j] = reach[i][j] = mk->transition[i][j] > 0.0;
    }
    const std::size_t bound = (m - 1) * (m - 1) + 1;
    bool primitive = false;
    for (std::size_t step = 1; step <= bound; ++step) {
      bool all = true;
      for (const auto& row : reach) all = all && std::all_of(row.begin(), row.end(), [](char c) { return c != 0; });
      if (all) {
        primitive = true;
        break;
      }
      std::vector<std::vector<char>> next(m, std::vector<char>(m, 0));
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < m; ++k)
          if (reach[i][k])
            for (std::size_t j = 0; j < m; ++j) next[i][j] = next[i][j] || base[k][j];
      reach = std::move(next);
    }
    if (!primitive) throw std::invalid_argument("markov law: transition matrix must be irreducible and aperiodic");
  } else if (const auto* pp = std::get_if<EnvSpec::PeriodicPhase>(&spec.law)) {
    if (pp->pattern.empty()) throw std::invalid_argument("periodic law: empty pattern");
    for (auto c : pp->pattern) {
      if (c < 0) throw std::invalid_argument("periodic law: negative count in pattern");
    }
  }
}

std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& transition) {
  // Solve pi (P - I) = 0 with sum(pi) = 1 by Gaussian elimination on the
  // transposed system, replacing the last equation by the normalization.
  const std::size_t m = transition.size();
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) a[i][j] = transition[j][i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < m; ++j) a[m - 1][j] = 1.0;
  a[m - 1][m] = 1.0;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) throw std::invalid_argument("markov law: singular stationary system");
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> pi(m);
  for (std::size_t i = 0; i < m; ++i) pi[i] = std::max(0.0, a[i][m] / a[i][i]);
  const double s = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (auto& p : pi) p /= s;
  return pi;
}

Configuration sample_configuration(const EnvSpec& spec, const SleepMix& mix, const Interval& window,
                                   std::uint64_t seed) {
  if (window.empty()) throw std::invalid_argument("sampling window must be non-empty");
  if (!(mix.q >= 0.0 && mix.q <= 1.0)) throw std::invalid_argument("sleep mix q must lie in [0, 1]");
  validate(spec);

  std::vector<std::int32_t> counts(static_cast<std::size_t>(window.size()));
  if (const auto* iid = std::get_if<EnvSpec::Iid>(&spec.law)) {
    for (Site x = window.lo; x <= window.hi; ++x) {
      counts[static_cast<std::size_t>(x - window.lo)] = iid->marginal.sample(uniform(seed, x, 0));
    }
  } else if (const auto* mk = std::get_if<EnvSpec::MarkovMod>(&spec.law)) {
    const auto pi = stationary_distribution(mk->transition);
    auto draw = [](const std::vector<double>& probs, double u) {
      double acc = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
      }
      return probs.size() - 1;
    };
    std::size_t h = draw(pi, uniform(seed, window.lo, 2));
    for (Site x = window.lo; x <= window.hi; ++x) {
      if (x > window.lo) h = draw(mk->transition[h], uniform(seed, x, 2));
      counts[static_cast<std::size_t>(x - window.lo)] = mk->marginals[h].sample(uniform(seed, x, 0));
    }
  } else {
    const auto& pat = std::get<EnvSpec::PeriodicPhase>(spec.law).pattern;
    const auto len = static_cast<Site>(pat.size());
    const Site phase = static_cast<Site>(mix::derive(seed, 0x9a5eULL) % static_cast<std::uint64_t>(len));
    for (Site x = window.lo; x <= window.hi; ++x) {
      const Site i = ((x + phase) % len + len) % len;
      counts[static_cast<std::size_t>(x - window.lo)] = pat[static_cast<std::size_t>(i)];
    }
  }

  std::vector<SiteState> states;
  states.reserve(counts.size());
  for (Site x = window.lo; x <= window.hi; ++x) {
    const auto c = counts[static_cast<std::size_t>(x - window.lo)];
    const bool sleeps = c == 1 && uniform(seed, x, 1) < mix.q;
    states.push_back(SiteState::from_count(c, sleeps));
  }
  return Configuration(window.lo, std::move(states));
}

double empirical_density(const Configuration& config, std::int64_t n, bool mirrored) {
  if (n < 1) throw std::invalid_argument("empirical_density needs n >= 1");
  const Interval span = mirrored ? Interval{-n, -1} : Interval{1, n};
  if (!config.window().contains(span)) throw WindowOverflow("density window [1, n] leaves the configuration");
  return static_cast<double>(config.particles_in(span)) / static_cast<double>(n);
}

double weighted_profile(const Configuration& config, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("weighted_profile needs n >= 1");
  if (!config.window().contains(Interval{1, n})) throw WindowOverflow("profile window [1, n] leaves the configuration");
  double s = 0.0;
  for (Site j = 1; j <= n; ++j) s += static_cast<double>(j) * config.at(j).particles();
  return s / (static_cast<double>(n) * static_cast<double>(n));
}

std::vector<HypothesisRow> hypothesis_check(const Configuration& config, std::int64_t N, std::int64_t n_max,
                                            double eps, double beta, double rho_c_ref) {
  if (N < 1 || n_max < N) throw std::invalid_argument("hypothesis_check needs 1 <= N <= n_max");
  if (!config.window().contains(Interval{1, n_max})) throw WindowOverflow("hypothesis window leaves the configuration");
  std::vector<HypothesisRow> rows;
  // Integer partial sums keep the comparison exact in the counts.
  std::int64_t weighted = 0;
  std::int64_t plain = 0;
  for (Site j = 1; j <= n_max; ++j) {
    const std::int64_t c = config.at(j).particles();
    weighted += j * c;
    plain += c;
    if (j >= N) {
      const double n = static_cast<double>(j);
      rows.push_back({j, static_cast<double>(weighted) >= (rho_c_ref + eps) * n * n / 2.0,
                      static_cast<double>(plain) <= beta * n});
    }
  }
  return rows;
}

EnvSpec parse_env_spec(const std::map<std::string, std::string>& kv) {
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("missing key '" + key + "'");
    return it->second;
  };
  const auto kind_it = kv.find("kind");
  const std::string kind = kind_it == kv.end() ? "iid-poisson" : kind_it->second;
  if (kind == "iid-poisson") {
    const auto t = kv.find("truncation");
    return EnvSpec::iid(Marginal::poisson(to_double("rho", get("rho")),
                                          t == kv.end() ? 30 : to_int("truncation", t->second)));
  }
  if (kind == "iid-finite") {
    return EnvSpec::iid(parse_marginal("support", "finite:" + get("support")));
  }
  if (kind == "markov") {
    std::vector<std::vector<double>> p;
    for (const auto& row : split(get("transition"), ';')) {
      std::vector<double> r;
      for (const auto& v : split(row, ',')) r.push_back(to_double("transition", trim(v)));
      p.push_back(std::move(r));
    }
    std::vector<Marginal> ms;
    for (const auto& m : split(get("marginals"), ';')) ms.push_back(parse_marginal("marginals", trim(m)));
    try {
      return EnvSpec::markov(std::move(p), std::move(ms));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("key 'transition': ") + e.what());
    }
  }
  if (kind == "periodic") {
    std::vector<std::int32_t> pat;
    for (const auto& v : split(get("pattern"), ',')) pat.push_back(to_int("pattern", trim(v)));
    try {
      return EnvSpec::periodic(std::move(pat));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("key 'pattern': ") + e.what());
    }
  }
  throw std::invalid_argument("key 'kind': unknown law '" + kind + "'");
}

std::map<std::string, std::string> env_spec_to_kv(const EnvSpec& spec) {
  std::map<std::string, std::string> kv;
  if (const auto* iid = std::get_if<EnvSpec::Iid>(&spec.law)) {
    if (const auto* p = std::get_if<Marginal::Poisson>(&iid->marginal.variant())) {
      kv["kind"] = "iid-poisson";
      kv["rho"] = fmt_double(p->rho);
      kv["truncation"] = std::to_string(p->truncation);
    } else {
      kv["kind"] = "iid-finite";
      kv["support"] = format_marginal(iid->marginal).substr(7);
    }
  } else if (const auto* mk = std::get_if<EnvSpec::MarkovMod>(&spec.law)) {
    kv["kind"] = "markov";
    std::string t;
    for (std::size_t i = 0; i < mk->transition.size(); ++i) {
      if (i) t += ';';
      for (std::size_t j = 0; j < mk->transition[i].size(); ++j) {
        if (j) t += ',';
        t += fmt_double(mk->transition[i][j]);
      }
    }
    kv["transition"] = t;
    std::string m;
    for (std::size_t i = 0; i < mk->marginals.size(); ++i) {
      if (i) m += ';';
      m += format_marginal(mk->marginals[i]);
    }
    kv["marginals"] = m;
  } else {
    const auto& pat = std::get<EnvSpec::PeriodicPhase>(spec.law).pattern;
    std::string p;
    for (std::size_t i = 0; i < pat.size(); ++i) {
      if (i) p += ',';
      p += std::to_string(pat[i]);
    }
    kv["kind"] = "periodic";
    kv["pattern"] = p;
  }
  return kv;
}

}  // namespace arw
