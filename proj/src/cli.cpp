#include "arw/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "arw/experiments.hpp"
#include "arw/lemmas.hpp"

#ifndef ARW_VERSION
#define ARW_VERSION "0.0.0"
#endif

namespace arw::cli {

namespace {

using nlohmann::ordered_json;

const std::vector<std::string> kCommands = {"stabilize", "ek-scan", "explode", "nucleate",
                                            "rhoc",      "check-lemmas", "selftest"};

// Keys describing the initial law; shared by every sampling subcommand.
const std::vector<std::string> kLawKeys = {"kind", "rho", "truncation", "support", "pattern", "transition", "marginals"};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::int64_t> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoll(trim(item), &pos));
      if (pos != trim(item).size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': '" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::int64_t int_key(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': '" + text + "' is not an integer");
}

unsigned default_workers() {
  if (const char* env = std::getenv("ARW_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

// Effective parameters, in the order they were declared.
class RunParams {
 public:
  void set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : items_) {
      if (k == key) {
        v = value;
        return;
      }
    }
    items_.emplace_back(key, value);
  }
  ordered_json to_json() const {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : items_) j[k] = v;
    return j;
  }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

struct Common {
  double lambda = 1.0;
  std::uint64_t seed = 1;
  std::uint64_t cap = kDefaultCap;
  std::uint64_t trials = 500;
  unsigned workers = 1;
  double q = 1.0;
  std::string out;
  std::string summary;
  std::string config;
  std::map<std::string, std::string> law;
};

void add_common(CLI::App& app, Common& c, bool with_law, bool with_trials) {
  app.add_option("--config", c.config, "flat key=value file or JSON run summary");
  app.add_option("--lambda", c.lambda, "sleep rate")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", c.seed, "master seed");
  app.add_option("--cap", c.cap, "toppling cap per stabilization")->check(CLI::PositiveNumber);
  app.add_option("--workers", c.workers, "worker threads (default $ARW_WORKERS or 1)")->check(CLI::PositiveNumber);
  app.add_option("--out", c.out, "CSV output path (default stdout)");
  app.add_option("--summary", c.summary, "JSON summary path (default <out>.json)");
  if (with_trials) app.add_option("--trials", c.trials, "trials per grid point")->check(CLI::PositiveNumber);
  if (with_law) {
    app.add_option("--q", c.q, "probability that a lone particle starts asleep")->check(CLI::Range(0.0, 1.0));
    for (const auto& key : kLawKeys) {
      app.add_option_function<std::string>("--" + key, [&c, key](const std::string& v) { c.law[key] = v; },
                                            "initial law: " + key);
    }
  }
}

EnvSpec law_of(const Common& c) {
  auto kv = c.law;
  if (!kv.count("rho") && (!kv.count("kind") || kv.at("kind") == "iid-poisson")) kv["rho"] = "1.2";
  try {
    return parse_env_spec(kv);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void record_common(RunParams& p, const Common& c, bool with_law, bool with_trials) {
  p.set("lambda", num(c.lambda));
  p.set("seed", std::to_string(c.seed));
  p.set("cap", std::to_string(c.cap));
  if (with_trials) p.set("trials", std::to_string(c.trials));
  p.set("workers", std::to_string(c.workers));
  if (with_law) {
    p.set("q", num(c.q));
    for (const auto& [k, v] : env_spec_to_kv(law_of(c))) p.set(k, v);
  }
}

McSettings mc_of(const Common& c) { return McSettings{c.trials, c.seed, c.cap, c.workers}; }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << content;
}

// Writes the CSV and the summary.
void emit(const std::string& command, const Common& c, const RunParams& params, const std::string& csv,
          ordered_json results, std::ostream& out, std::ostream& err) {
  if (c.out.empty()) {
    out << csv;
  } else {
    write_file(c.out, csv);
  }
  ordered_json s;
  s["command"] = command;
  s["version"] = ARW_VERSION;
  s["mixer"] = std::string(kMixerId);
  s["params"] = params.to_json();
  s["outputs"] = {{"csv", c.out.empty() ? "-" : c.out}, {"sha1", git_blob_hash(csv)}, {"bytes", csv.size()}};
  s["results"] = std::move(results);
  const std::string text = s.dump(2) + "\n";
  const std::string path = !c.summary.empty() ? c.summary : (c.out.empty() ? "" : c.out + ".json");
  if (path.empty()) {
    err << text;
  } else {
    write_file(path, text);
  }
}

bool capped_dominates(std::uint64_t capped, std::uint64_t trials) { return trials > 0 && capped * 10 > trials; }

std::string proportion_cells(const ProportionRow& p) { return num(p.p_hat) + "," + num(p.ci.lo) + "," + num(p.ci.hi); }

// ------------------------------------------------------------- commands

int cmd_stabilize(const Common& c, const std::map<std::string, std::string>& extra, std::ostream& out,
                  std::ostream& err) {
  RunParams p;
  Configuration sigma;
  const std::string input = extra.at("input");
  const std::int64_t lo = int_key("lo", extra.at("lo"));
  const std::int64_t hi = int_key("hi", extra.at("hi"));
  if (!input.empty()) {
    std::ifstream f(input);
    if (!f) throw ConfigError("key 'input': cannot read '" + input + "'");
    try {
      sigma = parse_configuration(f);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("key 'input': ") + e.what());
    }
    p.set("input", input);
  } else {
    if (hi - lo < 2) throw ConfigError("key 'hi': window [lo, hi] needs at least three sites");
    sigma = sample_configuration(law_of(c), SleepMix{c.q}, Interval{lo, hi}, c.seed);
    p.set("lo", std::to_string(lo));
    p.set("hi", std::to_string(hi));
  }
  record_common(p, c, input.empty(), false);
  Interval v{sigma.lo() + 1, sigma.hi() - 1};
  if (!extra.at("vlo").empty()) v.lo = int_key("vlo", extra.at("vlo"));
  if (!extra.at("vhi").empty()) v.hi = int_key("vhi", extra.at("vhi"));
  if (v.empty() || !sigma.in_window(v.lo - 1) || !sigma.in_window(v.hi + 1)) {
    throw ConfigError("key 'vlo': region must be non-empty with a halo inside the window");
  }
  p.set("vlo", std::to_string(v.lo));
  p.set("vhi", std::to_string(v.hi));

  Policy policy;
  const std::string& pol = extra.at("policy");
  if (pol == "fifo") {
    policy = Policy::fifo();
  } else if (pol == "leftmost") {
    policy = Policy::leftmost();
  } else if (pol == "rightmost") {
    policy = Policy::rightmost();
  } else if (pol == "random") {
    policy = Policy::random_queue(mix::derive(c.seed, 0x9011ULL));
  } else {
    throw ConfigError("key 'policy': unknown policy '" + pol + "'");
  }
  p.set("policy", pol);

  Configuration start = sigma;
  if (extra.at("wake") == "region") {
    start = wake(sigma, v);
  } else if (extra.at("wake") == "origin") {
    if (!v.contains(0)) throw ConfigError("key 'wake': origin lies outside the region");
    const Site o = 0;
    start = wake(sigma, std::span<const Site>(&o, 1));
  } else if (extra.at("wake") != "none") {
    throw ConfigError("key 'wake': expected none, origin or region");
  }
  p.set("wake", extra.at("wake"));

  const auto source = InstructionSource::random(mix::derive(c.seed, 0x50c7ULL), Params{c.lambda});
  const StabilizeReport rep = stabilize(start, source, v, policy, c.cap);

  std::string csv = "site,initial,final,odometer,visited\n";
  for (Site x = sigma.lo(); x <= sigma.hi(); ++x) {
    csv += std::to_string(x) + "," + format_state(start.at(x)) + "," + format_state(rep.final.at(x)) + "," +
           std::to_string(rep.odometer.at(x)) + "," + (rep.odometer.at(x) > 0 ? "1" : "0") + "\n";
  }
  if (!extra.at("dump").empty()) write_file(extra.at("dump"), format_configuration(rep.final));
  ordered_json res = {{"topplings", rep.topplings},
                      {"capped", rep.capped},
                      {"stable", is_stable(rep.final, v)},
                      {"arrival_left", rep.arrived(v.lo - 1)},
                      {"arrival_right", rep.arrived(v.hi + 1)}};
  emit("stabilize", c, p, csv, res, out, err);
  return rep.capped ? kExitCapped : kExitOk;
}

int cmd_ek_scan(const Common& c, std::int64_t kmin, std::int64_t kmax, std::int64_t step, std::ostream& out,
                std::ostream& err) {
  if (kmin < 1 || kmax < kmin || step < 1) throw ConfigError("key 'kmin': need 1 <= kmin <= kmax and step >= 1");
  RunParams p;
  record_common(p, c, true, true);
  p.set("kmin", std::to_string(kmin));
  p.set("kmax", std::to_string(kmax));
  p.set("step", std::to_string(step));
  std::vector<std::int64_t> grid;
  for (std::int64_t k = kmin; k <= kmax; k += step) grid.push_back(k);
  const auto rows = ek_curve(c.lambda, law_of(c), SleepMix{c.q}, grid, mc_of(c));

  std::string csv = "k,trials,successes,p_hat,ci_lo,ci_hi,capped\n";
  bool capped = false;
  for (const auto& r : rows) {
    csv += std::to_string(r.k) + "," + std::to_string(r.p.trials) + "," + std::to_string(r.p.successes) + "," +
           proportion_cells(r.p) + "," + std::to_string(r.p.capped) + "\n";
    capped = capped || capped_dominates(r.p.capped, r.p.trials);
  }
  ordered_json res = ordered_json::object();
  try {
    const DecayFit f = fit_decay(rows);
    res["fit"] = {{"c_hat", f.c_hat}, {"C_hat", f.C_hat}, {"r_squared", f.r_squared},
                  {"c_lo", f.c_lo},   {"c_hi", f.c_hi},   {"points", f.points}};
  } catch (const std::invalid_argument& e) {
    res["fit"] = e.what();
  }
  emit("ek-scan", c, p, csv, res, out, err);
  return capped ? kExitCapped : kExitOk;
}

int cmd_explode(const Common& c, const std::string& radii, std::ostream& out, std::ostream& err) {
  const auto grid = parse_int_list("radii", radii);
  for (auto r : grid) {
    if (r < 1) throw ConfigError("key 'radii': radii must be positive");
  }
  RunParams p;
  record_common(p, c, true, true);
  p.set("radii", radii);
  const auto rows = explode_curve(c.lambda, law_of(c), SleepMix{c.q}, grid, mc_of(c));
  std::string csv = "R,trials,reached_both,stabilized,capped,p_hat,ci_lo,ci_hi\n";
  bool capped = false;
  for (const auto& r : rows) {
    csv += std::to_string(r.R) + "," + std::to_string(r.p.trials) + "," + std::to_string(r.reached_both) + "," +
           std::to_string(r.stabilized) + "," + std::to_string(r.p.capped) + "," + proportion_cells(r.p) + "\n";
    capped = capped || capped_dominates(r.p.capped, r.p.trials);
  }
  emit("explode", c, p, csv, ordered_json::object(), out, err);
  return capped ? kExitCapped : kExitOk;
}

int cmd_nucleate(const Common& c, std::int64_t m, std::int64_t K, std::ostream& out, std::ostream& err) {
  if (m < 1 || K < m) throw ConfigError("key 'm': need 1 <= m <= K");
  RunParams p;
  record_common(p, c, true, true);
  p.set("m", std::to_string(m));
  p.set("K", std::to_string(K));
  const NucleateRow r = nucleate_curve(c.lambda, law_of(c), SleepMix{c.q}, m, K, mc_of(c));
  std::string csv = "m,K,trials,covered,success,p_hat,ci_lo,ci_hi\n";
  csv += std::to_string(r.m) + "," + std::to_string(r.K) + "," + std::to_string(r.p.trials) + "," +
         std::to_string(r.covered) + "," + std::to_string(r.p.successes) + "," + proportion_cells(r.p) + "\n";
  emit("nucleate", c, p, csv, {{"capped", r.p.capped}}, out, err);
  return capped_dominates(r.p.capped, r.p.trials) ? kExitCapped : kExitOk;
}

int cmd_rhoc(const Common& c, std::int64_t k, double lo, double hi, double tol, std::ostream& out,
             std::ostream& err) {
  if (k < 1) throw ConfigError("key 'k': must be positive");
  if (!(lo > 0.0) || !(lo < hi)) throw ConfigError("key 'rho-lo': need 0 < rho-lo < rho-hi");
  if (!(tol > 0.0)) throw ConfigError("key 'tol': must be positive");
  RunParams p;
  p.set("lambda", num(c.lambda));
  p.set("seed", std::to_string(c.seed));
  p.set("cap", std::to_string(c.cap));
  p.set("trials", std::to_string(c.trials));
  p.set("workers", std::to_string(c.workers));
  p.set("q", num(c.q));
  p.set("k", std::to_string(k));
  p.set("rho-lo", num(lo));
  p.set("rho-hi", num(hi));
  p.set("tol", num(tol));
  const RhoEstimate est = estimate_rho_c(c.lambda, k, SleepMix{c.q}, lo, hi, tol, mc_of(c));
  std::string csv = "iter,rho_lo,rho_hi,rho_mid,p_hat\n";
  bool capped = false;
  for (const auto& it : est.iterations) {
    csv += std::to_string(it.iter) + "," + num(it.rho_lo) + "," + num(it.rho_hi) + "," + num(it.rho_mid) + "," +
           num(it.p.p_hat) + "\n";
    capped = capped || capped_dominates(it.p.capped, it.p.trials);
  }
  ordered_json res = {{"rho_hat", est.rho_hat},
                      {"bracket_lo", est.bracket_lo},
                      {"bracket_hi", est.bracket_hi},
                      {"flagged", est.flagged}};
  emit("rhoc", c, p, csv, res, out, err);
  return capped ? kExitCapped : kExitOk;
}

int cmd_check_lemmas(const Common& c, std::size_t instances, std::size_t window_instances, std::ostream& out) {
  const auto suite = generate_instances(c.seed, instances);
  const std::vector<SuiteResult> results = {
      check_abelian(suite, c.cap), check_preemptive(suite, c.cap),
      check_monotonicity(suite, mix::derive(c.seed, 0x3e3ULL), c.cap),
      check_window_growth(mix::derive(c.seed, 0x61aULL), window_instances, c.cap), check_cesaro()};
  bool ok = true;
  for (const auto& r : results) {
    out << r.name << ": " << (r.passed() ? "PASS" : "FAIL") << " (" << r.instances << " instances, "
        << r.violations << " violations, " << r.capped << " capped)";
    if (!r.first_failure.empty()) out << " first failure: " << r.first_failure;
    out << "\n";
    ok = ok && r.passed();
  }
  return ok ? kExitOk : kExitFailed;
}

int cmd_selftest(std::ostream& out) {
  using I = Instruction;
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    out << name << ": " << (ok ? "PASS" : "FAIL") << "\n";
    failures += ok ? 0 : 1;
  };
  {
    Configuration cfg(0, 3);
    cfg.set(1, SiteState::active(1));
    const auto src = InstructionSource::scripted(std::map<Site, std::vector<I>>{{1, {I::Right}}, {2, {I::Sleep}}}, I::Sleep);
    const auto rep = stabilize(cfg, src, Interval{1, 2});
    check("stabilize-scripted", rep.odometer.at(1) == 1 && rep.odometer.at(2) == 1 && rep.final.at(1).is_empty() &&
                                    rep.final.at(2).is_sleeping());
  }
  {
    Configuration cfg(0, 2);
    cfg.set(1, SiteState::active(2));
    const auto src = InstructionSource::scripted(std::map<Site, std::vector<I>>{{1, {I::Right, I::Left}}}, I::Sleep);
    check("ek-escape", event_ek(cfg, src, 1).holds == false);
  }
  {
    const auto src = InstructionSource::random(7, Params{1.0});
    check("mixer-purity", stack_prefix(src, -5, 64) == stack_prefix(src, -5, 64));
  }
  {
    const auto r = check_cesaro();
    check("cesaro", r.passed());
  }
  {
    const auto suite = generate_instances(11, 25);
    check("abelian-small", check_abelian(suite, kDefaultCap).passed());
  }
  return failures == 0 ? kExitOk : kExitFailed;
}

// Inserts config-file values for every key not given on the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(key);
    if (key == "config") {
      if (eq != std::string::npos) {
        path = a.substr(eq + 1);
      } else if (i + 1 < args.size()) {
        path = args[i + 1];
      }
    }
  }
  std::vector<std::string> merged = {args[0]};
  if (!path.empty()) {
    for (const auto& [key, value] : load_config_file(path)) {
      if (key == "config" || given.count(key)) continue;
      merged.push_back("--" + key + "=" + value);
    }
  }
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

void usage(std::ostream& os) {
  os << "usage: arw <command> [options]\n\ncommands:\n"
        "  stabilize     stabilize a configuration and dump the odometer\n"
        "  ek-scan       estimate P(E_k) on a grid of k\n"
        "  explode       reach trials from a single woken site\n"
        "  nucleate      excursion plus midstream half-line scans\n"
        "  rhoc          bisection estimate of the critical density\n"
        "  check-lemmas  exact invariant suites\n"
        "  selftest      quick built-in checks\n\n"
        "run 'arw <command> --help' for options\n";
}

}  // namespace

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();
  std::map<std::string, std::string> kv;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file '" + path + "': " + e.what());
    }
    if (!j.contains("params") || !j["params"].is_object()) {
      throw ConfigError("config file '" + path + "': summary has no 'params' object");
    }
    for (const auto& [k, v] : j["params"].items()) kv[k] = v.is_string() ? v.get<std::string>() : v.dump();
    return kv;
  }
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config file '" + path + "' line " + std::to_string(lineno) + ": expected key = value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 15];
  }
  return hex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    usage(args.empty() ? err : out);
    return args.empty() ? kExitConfig : kExitOk;
  }
  const std::string& command = args[0];
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
    err << "arw: unknown command '" << command << "'\n";
    usage(err);
    return kExitConfig;
  }

  try {
    const std::vector<std::string> merged = merge_config(args);

    CLI::App app{"arw " + command};
    app.allow_extras(false);
    Common c;
    c.workers = default_workers();

    std::map<std::string, std::string> extra = {{"input", ""},  {"lo", "-50"},   {"hi", "50"},       {"vlo", ""},
                                                {"vhi", ""},    {"dump", ""},    {"policy", "fifo"}, {"wake", "none"}};
    std::int64_t kmin = 25, kmax = 150, step = 25, m = 20, K = 300, k = 100;
    std::string radii = "50,100,200";
    double rho_lo = 0.05, rho_hi = 1.5, tol = 0.02;
    std::size_t instances = 500, window_instances = 200;

    const bool sampling = command == "ek-scan" || command == "explode" || command == "nucleate" || command == "stabilize";
    const bool trials = command == "ek-scan" || command == "explode" || command == "nucleate" || command == "rhoc";
    add_common(app, c, sampling, trials);
    if (command == "rhoc") {
      app.add_option("--q", c.q, "probability that a lone particle starts asleep")->check(CLI::Range(0.0, 1.0));
      app.add_option("--k", k, "E_k size");
      app.add_option("--rho-lo", rho_lo, "lower end of the initial bracket");
      app.add_option("--rho-hi", rho_hi, "upper end of the initial bracket");
      app.add_option("--tol", tol, "final bracket width");
    } else if (command == "ek-scan") {
      app.add_option("--kmin", kmin, "first k of the grid");
      app.add_option("--kmax", kmax, "last k of the grid");
      app.add_option("--step", step, "grid spacing");
    } else if (command == "explode") {
      app.add_option("--radii", radii, "comma-separated list of R");
    } else if (command == "nucleate") {
      app.add_option("--m", m, "half-width of the interval the excursion must cover");
      app.add_option("--K", K, "scan horizon");
    } else if (command == "check-lemmas") {
      app.add_option("--instances", instances, "random instances for the abelian suites");
      app.add_option("--window-instances", window_instances, "instances for the window-growth suite");
    } else if (command == "stabilize") {
      static const std::pair<const char*, const char*> kStabilizeFlags[] = {
          {"input", "configuration file (site<TAB>state per line); sampled when absent"},
          {"lo", "sampling window start"},
          {"hi", "sampling window end"},
          {"vlo", "first site of V (default window start + 1)"},
          {"vhi", "last site of V (default window end - 1)"},
          {"dump", "write the final configuration here"},
          {"policy", "fifo, leftmost, rightmost or random"},
          {"wake", "none, origin or region"}};
      for (const auto& [key, help] : kStabilizeFlags) app.add_option("--" + std::string(key), extra[key], help);
    }

    std::vector<std::string> rest(merged.rbegin(), merged.rend() - 1);
    try {
      app.parse(rest);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "arw " << command << ": " << e.what() << "\n";
      return kExitConfig;
    }

    if (command == "stabilize") return cmd_stabilize(c, extra, out, err);
    if (command == "ek-scan") return cmd_ek_scan(c, kmin, kmax, step, out, err);
    if (command == "explode") return cmd_explode(c, radii, out, err);
    if (command == "nucleate") return cmd_nucleate(c, m, K, out, err);
    if (command == "rhoc") return cmd_rhoc(c, k, rho_lo, rho_hi, tol, out, err);
    if (command == "check-lemmas") return cmd_check_lemmas(c, instances, window_instances, out);
    return cmd_selftest(out);
  } catch (const ConfigError& e) {
    err << "arw " << command << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "arw " << command << ": " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace arw::cli
