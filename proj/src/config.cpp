#include "timerobust/config.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "timerobust/adversaries.hpp"
#include "timerobust/estimators.hpp"
#include "timerobust/family.hpp"
#include "timerobust/rates.hpp"
#include "timerobust/selection.hpp"

namespace timerobust {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string effective_functional(const ExperimentConfig& cfg) {
  if (!cfg.functional.empty()) return cfg.functional;
  if (!cfg.rule_id.empty()) return "weak";
  if (!cfg.horizon_list.empty()) return "strong";
  return "standard";
}

namespace {

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_same_v<T, double>)
      s += fmt_double(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

void check_risk(const ExperimentConfig& cfg, const FamilySpec* fam,
                std::vector<std::string>& errs) {
  const std::string fn = effective_functional(cfg);
  if (fn != "standard" && fn != "weak" && fn != "strong" && fn != "bayes") {
    errs.push_back("unknown functional: " + fn +
                   " (valid: standard weak strong bayes)");
    return;
  }
  if (fn == "standard" && cfg.n_list.empty())
    errs.push_back("standard risk needs --n");
  if (fn == "standard" && !cfg.horizon_list.empty())
    errs.push_back("--horizon is only for the strong functional");
  if (fn == "strong" && cfg.horizon_list.empty())
    errs.push_back("strong risk needs --horizon");
  if (fn == "strong" && !cfg.n_list.empty())
    errs.push_back("--n is only for the standard functional");
  if ((fn == "weak" || fn == "bayes") && cfg.rule_id.empty())
    errs.push_back(fn + " risk needs --rule");
  if (fn == "weak" && (!cfg.n_list.empty() || !cfg.horizon_list.empty()))
    errs.push_back("weak risk takes no --n/--horizon (the rule decides)");
  if (fn == "bayes") {
    if (cfg.mu_grid.size() != 1)
      errs.push_back("bayes risk draws mu from the prior; --mu-grid invalid");
    if (cfg.prior_sd <= 0) errs.push_back("--prior-sd must be > 0");
    if (fam && (fam->k != 1 || fam->name.rfind("gaussian", 0) != 0))
      errs.push_back("bayes risk requires the scalar Gaussian family");
  }
  if (fn == "standard" && !cfg.rule_id.empty())
    errs.push_back("standard risk takes no --rule");
  if (fn == "strong" && !cfg.rule_id.empty())
    errs.push_back("strong risk takes no --rule (retrospective sup)");
  for (std::int64_t n : cfg.n_list)
    if (n < 1) errs.push_back("--n entries must be >= 1");
  for (std::size_t i = 0; i < cfg.horizon_list.size(); ++i) {
    if (cfg.horizon_list[i] < 1)
      errs.push_back("--horizon entries must be >= 1");
    if (i > 0 && cfg.horizon_list[i] <= cfg.horizon_list[i - 1])
      errs.push_back("--horizon entries must be strictly increasing");
  }
}

}  // namespace

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> errs;
  const FamilySpec* famp = nullptr;
  FamilySpec fam;
  try {
    fam = family_by_name(cfg.family_id);
    famp = &fam;
  } catch (const std::exception& e) {
    errs.push_back(e.what());
  }
  try {
    (void)estimator_by_name(cfg.estimator_id);
  } catch (const std::exception& e) {
    errs.push_back(e.what());
  }
  try {
    (void)rate_by_name(cfg.rate_id);
  } catch (const std::exception& e) {
    errs.push_back(e.what());
  }
  if (!cfg.rule_id.empty()) {
    try {
      const RuleSpec rule = parse_rule(cfg.rule_id);
      if (rule.kind != RuleSpec::Kind::Fixed && famp &&
          (fam.k != 1 || fam.name.rfind("gaussian", 0) != 0))
        errs.push_back("rule " + cfg.rule_id +
                       " requires the scalar Gaussian family");
    } catch (const std::exception& e) {
      errs.push_back(e.what());
    }
  }
  if (cfg.reps < 2) errs.push_back("--reps must be >= 2");
  if (cfg.workers < 1) errs.push_back("--workers must be >= 1");
  if (cfg.mu_grid.empty()) errs.push_back("--mu-grid must be nonempty");
  const bool mu_matters =
      cfg.subcommand != "dilemma" && effective_functional(cfg) != "bayes";
  if (famp && mu_matters) {
    for (double m : cfg.mu_grid) {
      std::vector<double> mu(static_cast<std::size_t>(fam.k), m);
      if (!fam.mu_in_box(mu.data()))
        errs.push_back("mu " + fmt_double(m) + " outside " + fam.name +
                       " parameter box [" + fmt_double(fam.box[0][0]) + ", " +
                       fmt_double(fam.box[0][1]) + "]");
    }
  }

  if (cfg.subcommand == "risk") {
    check_risk(cfg, famp, errs);
  } else if (cfg.subcommand == "supermartingale-check") {
    if (cfg.checkpoints.empty()) errs.push_back("--checkpoints must be nonempty");
    for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
      if (cfg.checkpoints[i] < 1)
        errs.push_back("--checkpoints entries must be >= 1");
      if (i > 0 && cfg.checkpoints[i] <= cfg.checkpoints[i - 1])
        errs.push_back("--checkpoints must be strictly increasing");
    }
    if (cfg.c0 < 0) errs.push_back("--c0 must be >= 0 (0 = default)");
  } else if (cfg.subcommand == "adversary-demo") {
    if (cfg.rule_id.empty()) errs.push_back("adversary-demo needs --rule");
    if (cfg.mu_grid.size() != 1)
      errs.push_back("adversary-demo takes a single --mu");
  } else if (cfg.subcommand == "dilemma") {
    try {
      (void)selector_by_name(cfg.selector_id);
    } catch (const std::exception& e) {
      errs.push_back(e.what());
    }
    if (cfg.n_grid.empty()) errs.push_back("--n-grid must be nonempty");
    for (std::int64_t n : cfg.n_grid) {
      if (n < 1) errs.push_back("--n-grid entries must be >= 1");
      if (cfg.selector_id == "bic" && n < 2)
        errs.push_back("--n-grid entries must be >= 2 for bic (penalty ln n)");
    }
  } else if (cfg.subcommand != "selftest") {
    errs.push_back("unknown subcommand: " + cfg.subcommand);
  }
  if (cfg.subcommand != "selftest" && cfg.out_path.empty())
    errs.push_back("--out is required");
  if (!cfg.dump_path.empty() && cfg.subcommand != "risk")
    errs.push_back("--dump is only supported by the risk subcommand");
  return errs;
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::string s;
  s += "subcommand=" + cfg.subcommand;
  s += ";family=" + cfg.family_id;
  s += ";estimator=" + cfg.estimator_id;
  s += ";rule=" + cfg.rule_id;
  s += ";rate=" + cfg.rate_id;
  s += ";functional=" + effective_functional(cfg);
  s += ";mu=" + join(cfg.mu_grid);
  s += ";n=" + join(cfg.n_list);
  s += ";horizon=" + join(cfg.horizon_list);
  s += ";checkpoints=" + join(cfg.checkpoints);
  s += ";n_grid=" + join(cfg.n_grid);
  s += ";selector=" + cfg.selector_id;
  s += ";mu0=" + fmt_double(cfg.mu0);
  s += ";prior_sd=" + fmt_double(cfg.prior_sd);
  s += ";c0=" + fmt_double(cfg.c0);
  s += ";reps=" + std::to_string(cfg.reps);
  s += ";seed=" + std::to_string(cfg.seed);
  return s;
}

std::string config_digest(const ExperimentConfig& cfg) {
  const std::string s = canonical_config(cfg);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace timerobust
