// Command-line front end for the time-robust estimation risk simulator.
//
// Subcommands:
//   risk                  standard / weak / strong / bayes risk curves
//   supermartingale-check Monte Carlo audit of the LIL mixture (E[Z] <= 1)
//   adversary-demo        stopping-rule behavior against one estimator
//   dilemma               AIC/BIC post-selection risk trade-off
//   selftest              fast built-in sanity checks (no output files)
//
// Options may come from the command line or a flat key=value --config file
// (bare option names, comma-separated lists, '#' comments).  Command-line
// flags override the file.  The seed falls back to the TIMEROBUST_SEED
// environment variable when neither source sets it.
//
// Exit codes: 0 ok, 2 bad arguments, 3 non-finite losses encountered
// (output still written), 4 output not writable.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "timerobust/config.hpp"
#include "timerobust/runner.hpp"
#include "timerobust/version.hpp"

namespace {

struct CliState {
  timerobust::ExperimentConfig cfg;
  double mu_single = 0.0;
  std::string config_path;
};

void add_common(CLI::App* sub, CliState& st) {
  timerobust::ExperimentConfig& cfg = st.cfg;
  sub->add_option("--family", cfg.family_id,
                  "family id: gaussian | bernoulli | gaussian_prod:<k>");
  sub->add_option("--estimator", cfg.estimator_id,
                  "estimator id, e.g. mle, posterior_mean, dyadic:mle");
  sub->add_option("--rule", cfg.rule_id,
                  "stopping rule id, e.g. fixed:100 or lil:0.1,27,100000");
  sub->add_option("--rate", cfg.rate_id,
                  "rate id: f_loglog | g_1_over_n | g_log_over_n | one");
  sub->add_option("--functional", cfg.functional,
                  "standard | weak | strong | bayes (default: inferred)");
  auto* mu_opt =
      sub->add_option("--mu", st.mu_single, "single true mean (scalar)");
  auto* grid_opt = sub->add_option("--mu-grid", cfg.mu_grid,
                                   "comma-separated list of true means")
                       ->delimiter(',');
  mu_opt->excludes(grid_opt);
  sub->add_option("--n", cfg.n_list, "sample sizes for the standard risk")
      ->delimiter(',');
  sub->add_option("--horizon", cfg.horizon_list,
                  "horizons for the strong risk (increasing)")
      ->delimiter(',');
  sub->add_option("--checkpoints", cfg.checkpoints,
                  "supermartingale checkpoint times (increasing)")
      ->delimiter(',');
  sub->add_option("--n-grid", cfg.n_grid, "dilemma sample sizes")
      ->delimiter(',');
  sub->add_option("--selector", cfg.selector_id, "aic | bic");
  sub->add_option("--mu0", cfg.mu0, "null-model mean for selection");
  sub->add_option("--prior-sd", cfg.prior_sd,
                  "prior standard deviation for the bayes functional");
  sub->add_option("--c0", cfg.c0, "mixture scale c0 (0 = family default)");
  sub->add_option("--reps", cfg.reps, "Monte Carlo replications");
  sub->add_option("--seed", cfg.seed,
                  "master seed (falls back to $TIMEROBUST_SEED)");
  sub->add_option("--workers", cfg.workers,
                  "worker threads (results are identical for any count)");
  sub->add_option("--out", cfg.out_path, "output CSV path");
  sub->add_option("--plot", cfg.plot_path, "optional SVG plot path");
  sub->add_option("--dump", cfg.dump_path,
                  "optional per-replication dump CSV (risk only)");
  sub->add_option("--config", st.config_path,
                  "flat key=value config file; command-line flags override");
}

// ---------------------------------------------------------------------------
// Flat key=value config files

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t p = s.find(',', start);
    const std::string tok =
        s.substr(start, p == std::string::npos ? p : p - start);
    std::size_t pos = 0;
    out.push_back(std::stod(tok, &pos));
    if (pos != tok.size()) throw std::invalid_argument("bad number: " + tok);
    if (p == std::string::npos) break;
    start = p + 1;
  }
  return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& s) {
  std::vector<std::int64_t> out;
  for (double v : parse_double_list(s)) {
    const auto i = static_cast<std::int64_t>(v);
    if (static_cast<double>(i) != v)
      throw std::invalid_argument("expected an integer, got " + s);
    out.push_back(i);
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    const std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const std::size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " is not key=value: " + line);
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    const std::size_t ke = key.find_last_not_of(" \t");
    key = key.substr(0, ke + 1);
    const std::size_t vb = val.find_first_not_of(" \t");
    val = vb == std::string::npos ? "" : val.substr(vb);
    kv[key] = val;
  }
  return kv;
}

// Applies one config-file entry; returns false for an unknown key.
bool apply_kv(timerobust::ExperimentConfig& cfg, const std::string& key,
              const std::string& val) {
  if (key == "family") cfg.family_id = val;
  else if (key == "estimator") cfg.estimator_id = val;
  else if (key == "rule") cfg.rule_id = val;
  else if (key == "rate") cfg.rate_id = val;
  else if (key == "functional") cfg.functional = val;
  else if (key == "mu" || key == "mu-grid") cfg.mu_grid = parse_double_list(val);
  else if (key == "n") cfg.n_list = parse_int_list(val);
  else if (key == "horizon") cfg.horizon_list = parse_int_list(val);
  else if (key == "checkpoints") cfg.checkpoints = parse_int_list(val);
  else if (key == "n-grid") cfg.n_grid = parse_int_list(val);
  else if (key == "selector") cfg.selector_id = val;
  else if (key == "mu0") cfg.mu0 = std::stod(val);
  else if (key == "prior-sd") cfg.prior_sd = std::stod(val);
  else if (key == "c0") cfg.c0 = std::stod(val);
  else if (key == "reps") cfg.reps = parse_int_list(val).at(0);
  else if (key == "seed") cfg.seed = std::stoull(val);
  else if (key == "workers") cfg.workers = static_cast<int>(parse_int_list(val).at(0));
  else if (key == "out") cfg.out_path = val;
  else if (key == "plot") cfg.plot_path = val;
  else if (key == "dump") cfg.dump_path = val;
  else return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CliState st;

  CLI::App app{"time-robust estimation risk simulator"};
  app.set_version_flag("--version", timerobust::kVersion);
  app.require_subcommand(1);

  CLI::App* risk = app.add_subcommand(
      "risk", "estimate a risk functional over a mean grid");
  CLI::App* smg = app.add_subcommand(
      "supermartingale-check",
      "Monte Carlo audit of the LIL mixture supermartingale");
  CLI::App* demo = app.add_subcommand(
      "adversary-demo", "stopping-rule statistics against one estimator");
  CLI::App* dil = app.add_subcommand(
      "dilemma", "AIC/BIC post-selection risk trade-off");
  CLI::App* self =
      app.add_subcommand("selftest", "fast built-in sanity checks");
  for (CLI::App* sub : {risk, smg, demo, dil, self}) add_common(sub, st);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : timerobust::kExitBadArgs;
  }

  CLI::App* sub = app.get_subcommands().front();
  st.cfg.subcommand = sub->get_name();
  const bool cmd_mu = sub->count("--mu") > 0 || sub->count("--mu-grid") > 0;
  if (sub->count("--mu") > 0) st.cfg.mu_grid = {st.mu_single};

  bool seed_set = sub->count("--seed") > 0;
  if (!st.config_path.empty()) {
    try {
      const auto kv = read_config_file(st.config_path);
      for (const auto& [key, val] : kv) {
        const CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr) {
          std::cerr << "error: unknown config key: " << key << "\n";
          return timerobust::kExitBadArgs;
        }
        if ((key == "mu" || key == "mu-grid") && cmd_mu) continue;
        if (opt->count() > 0) continue;  // flags win
        if (key == "seed") seed_set = true;
        (void)apply_kv(st.cfg, key, val);
      }
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return timerobust::kExitBadArgs;
    }
  }
  if (!seed_set) {
    if (const char* env = std::getenv("TIMEROBUST_SEED")) {
      try {
        st.cfg.seed = std::stoull(env);
      } catch (const std::exception&) {
        std::cerr << "error: TIMEROBUST_SEED is not an integer: " << env
                  << "\n";
        return timerobust::kExitBadArgs;
      }
    }
  }
  return timerobust::run_command(st.cfg, std::cerr);
}
