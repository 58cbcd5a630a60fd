#include "timerobust/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "timerobust/adversaries.hpp"
#include "timerobust/estimators.hpp"
#include "timerobust/family.hpp"
#include "timerobust/numeric.hpp"
#include "timerobust/rates.hpp"
#include "timerobust/risk.hpp"
#include "timerobust/rng.hpp"
#include "timerobust/selection.hpp"
#include "timerobust/supermartingale.hpp"
#include "timerobust/version.hpp"

namespace timerobust {

namespace {

// ---------------------------------------------------------------------------
// CSV assembly

std::string csv_cell(const std::string& c) {
  if (c.find_first_of(",\"\n") == std::string::npos) return c;
  std::string out = "\"";
  for (char ch : c) {
    if (ch == '"') out += "\"\"";
    out += ch;
  }
  out += "\"";
  return out;
}

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

struct EmitResult {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<PlotSeries> series;
  std::string dump_text;  // empty = no dump content
  std::int64_t nonfinite = 0;
};

std::string to_csv(const EmitResult& em) {
  std::string s;
  for (std::size_t i = 0; i < em.header.size(); ++i) {
    if (i) s += ',';
    s += em.header[i];
  }
  s += '\n';
  for (const auto& row : em.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      s += csv_cell(row[i]);
    }
    s += '\n';
  }
  return s;
}

// ---------------------------------------------------------------------------
// Minimal SVG line plot (log-scaled x when the spread warrants it)

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string render_svg(const std::vector<PlotSeries>& series,
                       const std::string& title, const std::string& x_label,
                       const std::string& y_label) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const int width = 780, height = 440;
  const double left = 80, right = 560, top = 40, bottom = 390;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  if (!std::isfinite(xmin)) {  // nothing plottable
    svg << "<text x=\"20\" y=\"30\">no finite data</text>\n</svg>\n";
    return svg.str();
  }
  const bool logx = xmin > 0 && xmax / xmin >= 50.0;
  auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  double txmin = tx(xmin), txmax = tx(xmax);
  if (txmax <= txmin) txmax = txmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double v) {
    return left + (tx(v) - txmin) / (txmax - txmin) * (right - left);
  };
  auto py = [&](double v) {
    return bottom - (v - ymin) / (ymax - ymin) * (bottom - top);
  };

  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << title
      << "</text>\n";
  // Axes and ticks.
  svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right
      << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = txmin + (txmax - txmin) * t / 4.0;
    const double vx = logx ? std::pow(10.0, fx) : fx;
    const double X = px(vx);
    svg << "<line x1=\"" << X << "\" y1=\"" << bottom << "\" x2=\"" << X
        << "\" y2=\"" << bottom + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << X << "\" y=\"" << bottom + 20
        << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt_tick(vx)
        << "</text>\n";
    const double vy = ymin + (ymax - ymin) * t / 4.0;
    const double Y = py(vy);
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << Y << "\" x2=\"" << left
        << "\" y2=\"" << Y << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << Y + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << fmt_tick(vy)
        << "</text>\n";
  }
  svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 8
      << "\" font-size=\"12\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (top + bottom) / 2
      << "\" font-size=\"12\" transform=\"rotate(-90 18 "
      << (top + bottom) / 2 << ")\" text-anchor=\"middle\">" << y_label
      << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % 8];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts << px(s.x[i]) << "," << py(s.y[i]) << " ";
      svg << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    svg << "<polyline points=\"" << pts.str()
        << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    const double ly = top + 18.0 * static_cast<double>(si);
    svg << "<line x1=\"" << right + 14 << "\" y1=\"" << ly << "\" x2=\""
        << right + 38 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << right + 44 << "\" y=\"" << ly + 4
        << "\" font-size=\"11\">" << s.label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

// ---------------------------------------------------------------------------
// Seed scheme: one sub-stream per grid point (a single point keeps the
// master seed so a sweep of size one reproduces a plain run), and one
// further level per row when a point spans several sample sizes.

std::uint64_t point_seed(std::uint64_t master, std::size_t count,
                         std::size_t idx) {
  return count == 1 ? master : mix_seed(master, idx);
}

void append_dump(std::string& dump, std::size_t row_idx,
                 const std::string& functional, const std::string& mu_cell,
                 std::int64_t n_or_cap, const std::vector<RepOutcome>& d) {
  for (std::size_t r = 0; r < d.size(); ++r) {
    dump += std::to_string(row_idx) + ',' + functional + ',' + mu_cell + ',' +
            std::to_string(n_or_cap) + ',' + std::to_string(r) + ',' +
            fmt_double(d[r].loss) + ',' + std::to_string(d[r].tau) + ',' +
            (d[r].triggered ? "1" : "0") + ',' + (d[r].cap ? "1" : "0") + '\n';
  }
}

// ---------------------------------------------------------------------------
// risk subcommand

EmitResult emit_risk(const ExperimentConfig& cfg) {
  EmitResult em;
  em.header = {"functional", "family",           "mu",       "estimator",
               "rule",       "rate",             "n_or_N",   "mean",
               "se",         "conditional_mean", "cap_hits", "reps",
               "seed",       "config_digest"};
  const FamilySpec fam = family_by_name(cfg.family_id);
  const EstimatorKind est = estimator_by_name(cfg.estimator_id);
  const RateFn rate = rate_by_name(cfg.rate_id);
  const std::string fn = effective_functional(cfg);
  const std::string digest = config_digest(cfg);
  const bool has_rule = !cfg.rule_id.empty();
  RuleSpec rule;
  if (has_rule) rule = parse_rule(cfg.rule_id);
  const std::string rule_cell = has_rule ? cfg.rule_id : "-";
  const bool want_dump = !cfg.dump_path.empty();
  if (want_dump)
    em.dump_text = "row,functional,mu,n_or_N,rep,loss,tau,triggered,cap\n";

  auto add_row = [&](const std::string& mu_cell, std::int64_t n_or_N,
                     const RiskEstimate& r) {
    em.rows.push_back({fn, fam.name, mu_cell, est.id, rule_cell, cfg.rate_id,
                       std::to_string(n_or_N), fmt_double(r.mean),
                       fmt_double(r.se), fmt_double(r.conditional_mean),
                       std::to_string(r.cap_hits), std::to_string(r.reps),
                       std::to_string(r.seed), digest});
    em.nonfinite += r.nonfinite;
  };

  if (fn == "bayes") {
    std::vector<RepOutcome> d;
    const RiskEstimate r =
        bayes_risk(fam, cfg.prior_sd, est, rule, rate, cfg.reps, cfg.seed,
                   cfg.workers, want_dump ? &d : nullptr);
    add_row("nan", rule.horizon_cap(), r);
    if (want_dump) append_dump(em.dump_text, 0, fn, "nan", rule.horizon_cap(), d);
    em.series.push_back({"bayes",
                         {static_cast<double>(rule.horizon_cap())},
                         {r.mean}});
    return em;
  }

  for (std::size_t mi = 0; mi < cfg.mu_grid.size(); ++mi) {
    const double mu = cfg.mu_grid[mi];
    const std::vector<double> muv(static_cast<std::size_t>(fam.k), mu);
    const std::string mu_cell = fmt_double(mu);
    const std::uint64_t ps = point_seed(cfg.seed, cfg.mu_grid.size(), mi);
    PlotSeries ser;
    ser.label = fn + " mu=" + mu_cell;

    if (fn == "standard") {
      for (std::size_t j = 0; j < cfg.n_list.size(); ++j) {
        const std::int64_t n = cfg.n_list[j];
        const std::uint64_t cs = point_seed(ps, cfg.n_list.size(), j);
        std::vector<RepOutcome> d;
        const RiskEstimate r =
            standard_risk(fam, muv, est, rate, n, cfg.reps, cs, cfg.workers,
                          want_dump ? &d : nullptr);
        add_row(mu_cell, n, r);
        if (want_dump)
          append_dump(em.dump_text, em.rows.size() - 1, fn, mu_cell, n, d);
        ser.x.push_back(static_cast<double>(n));
        ser.y.push_back(r.mean);
      }
    } else if (fn == "strong") {
      if (want_dump) {
        // The scalar driver supports per-replication dumps; nested seeds
        // make its rows bit-identical to the single-pass variant below.
        for (std::int64_t N : cfg.horizon_list) {
          std::vector<RepOutcome> d;
          const RiskEstimate r = strong_risk(fam, muv, est, rate, N, cfg.reps,
                                             ps, cfg.workers, &d);
          add_row(mu_cell, N, r);
          append_dump(em.dump_text, em.rows.size() - 1, fn, mu_cell, N, d);
          ser.x.push_back(static_cast<double>(N));
          ser.y.push_back(r.mean);
        }
      } else {
        const std::vector<RiskEstimate> rs = strong_risk_multi(
            fam, muv, est, rate, cfg.horizon_list, cfg.reps, ps, cfg.workers);
        for (std::size_t j = 0; j < rs.size(); ++j) {
          add_row(mu_cell, cfg.horizon_list[j], rs[j]);
          ser.x.push_back(static_cast<double>(cfg.horizon_list[j]));
          ser.y.push_back(rs[j].mean);
        }
      }
    } else {  // weak
      std::vector<RepOutcome> d;
      const RiskEstimate r = weak_risk(fam, muv, est, rule, rate, cfg.reps, ps,
                                       cfg.workers, want_dump ? &d : nullptr);
      add_row(mu_cell, rule.horizon_cap(), r);
      if (want_dump)
        append_dump(em.dump_text, em.rows.size() - 1, fn, mu_cell,
                    rule.horizon_cap(), d);
      ser.x.push_back(static_cast<double>(rule.horizon_cap()));
      ser.y.push_back(r.mean);
    }
    em.series.push_back(std::move(ser));
  }
  return em;
}

// ---------------------------------------------------------------------------
// supermartingale-check subcommand

EmitResult emit_supermartingale_check(const ExperimentConfig& cfg) {
  EmitResult em;
  em.header = {"mu",          "n",         "mean_Z", "se_Z", "mean_evalue",
               "se_evalue", "reps", "seed", "config_digest"};
  const FamilySpec fam = family_by_name(cfg.family_id);
  const MixtureSpec spec = make_mixture(fam.k, fam.sigma, fam.delta, cfg.c0);
  const std::string digest = config_digest(cfg);
  const std::vector<std::int64_t>& cps = cfg.checkpoints;
  const std::int64_t max_n = cps.back();
  const int ns = static_cast<int>(2 * cps.size());

  for (std::size_t mi = 0; mi < cfg.mu_grid.size(); ++mi) {
    const double mu = cfg.mu_grid[mi];
    const std::vector<double> muv(static_cast<std::size_t>(fam.k), mu);
    const std::uint64_t ps = point_seed(cfg.seed, cfg.mu_grid.size(), mi);
    const VectorStats vs = run_replications_vector(
        cfg.reps, ps, cfg.workers, ns,
        [&](std::int64_t, Rng& rng, double* out) {
          SupermartingaleState st;
          smg_reset(st, spec);
          std::vector<double> obs(static_cast<std::size_t>(fam.k));
          std::size_t ci = 0;
          for (std::int64_t t = 1; t <= max_n; ++t) {
            sample_phi(fam, muv.data(), rng, obs.data());
            z_update(st, obs.data(), muv.data());
            if (t == cps[ci]) {
              out[2 * ci] = std::exp(log_z_plus(st));
              out[2 * ci + 1] = evalue(st);
              if (++ci == cps.size()) break;
            }
          }
        });
    em.nonfinite += vs.nonfinite;
    PlotSeries ser;
    ser.label = "mean_Z mu=" + fmt_double(mu);
    for (std::size_t j = 0; j < cps.size(); ++j) {
      const RunningStats& z = vs.stats[2 * j];
      const RunningStats& e = vs.stats[2 * j + 1];
      em.rows.push_back({fmt_double(mu), std::to_string(cps[j]),
                         fmt_double(z.mean), fmt_double(z.se()),
                         fmt_double(e.mean), fmt_double(e.se()),
                         std::to_string(cfg.reps), std::to_string(ps),
                         digest});
      ser.x.push_back(static_cast<double>(cps[j]));
      ser.y.push_back(z.mean);
    }
    em.series.push_back(std::move(ser));
  }
  return em;
}

// ---------------------------------------------------------------------------
// adversary-demo subcommand

EmitResult emit_adversary_demo(const ExperimentConfig& cfg) {
  EmitResult em;
  em.header = {"family",          "mu",        "estimator",
               "rule",            "trigger_rate", "cap_rate",
               "mean_tau",        "mean_loss_ratio", "postcond_rate",
               "reps",            "seed",      "config_digest"};
  const FamilySpec fam = family_by_name(cfg.family_id);
  const EstimatorKind est = estimator_by_name(cfg.estimator_id);
  const RuleSpec rule = parse_rule(cfg.rule_id);
  const RateFn rate = rate_by_name(cfg.rate_id);
  const double mu = cfg.mu_grid[0];
  const std::vector<double> muv(static_cast<std::size_t>(fam.k), mu);
  const std::int64_t cap = rule.horizon_cap();

  const VectorStats vs = run_replications_vector(
      cfg.reps, cfg.seed, cfg.workers, 5,
      [&](std::int64_t, Rng& rng, double* out) {
        auto es = est.make_stream(est);
        es->reset(fam, muv.data());
        RuleStream rs(rule, fam, mu);
        std::vector<double> obs(static_cast<std::size_t>(fam.k));
        std::vector<double> eval(static_cast<std::size_t>(fam.k));
        double e_scalar = 0.0;
        for (std::int64_t t = 1; t <= cap; ++t) {
          sample_phi(fam, muv.data(), rng, obs.data());
          es->push(obs.data());
          if (fam.k == 1) {
            es->current(eval.data());
            e_scalar = eval[0];
          }
          if (rs.push(obs.data(), e_scalar)) break;
        }
        const std::int64_t tau = rs.tau();
        es->current(eval.data());
        double d2 = 0.0;
        for (int j = 0; j < fam.k; ++j)
          d2 += (mu - eval[j]) * (mu - eval[j]);
        out[0] = d2 / rate(tau);
        out[1] = static_cast<double>(tau);
        out[2] = rs.triggered() ? 1.0 : 0.0;
        out[3] = rs.cap_hit() ? 1.0 : 0.0;
        bool ok = false;
        if (rs.triggered()) {
          const double f = rate_f_loglog(tau);
          const double pm = rs.post_mean();
          switch (rule.kind) {
            case RuleSpec::Kind::Fixed:
              ok = tau == rule.fixed_n;
              break;
            case RuleSpec::Kind::Lil:
              ok = tau > rule.n0 && (mu - pm) * (mu - pm) >= rule.c * f;
              break;
            case RuleSpec::Kind::Gap: {
              const double ge = rs.gap_value();
              ok = tau > rule.n0 &&
                   (pm - ge) * (pm - ge) >= 0.5 * rule.c * f;
              break;
            }
            case RuleSpec::Kind::Capped:
              ok = tau > rule.n0 && tau < rule.nmax &&
                   (mu - pm) * (mu - pm) >= rule.c * f &&
                   (pm - e_scalar) * (pm - e_scalar) >= 0.5 * rule.c * f;
              break;
          }
        }
        out[4] = (rs.triggered() && ok) ? 1.0 : 0.0;
      });
  em.nonfinite += vs.nonfinite;
  const double trig = vs.stats[2].mean;
  const double post_rate =
      trig > 0 ? vs.stats[4].mean / trig
               : std::numeric_limits<double>::quiet_NaN();
  em.rows.push_back({fam.name, fmt_double(mu), est.id, cfg.rule_id,
                     fmt_double(trig), fmt_double(vs.stats[3].mean),
                     fmt_double(vs.stats[1].mean), fmt_double(vs.stats[0].mean),
                     fmt_double(post_rate), std::to_string(cfg.reps),
                     std::to_string(cfg.seed), config_digest(cfg)});
  em.series.push_back(
      {"mean_loss_ratio", {vs.stats[1].mean}, {vs.stats[0].mean}});
  return em;
}

// ---------------------------------------------------------------------------
// dilemma subcommand

EmitResult emit_dilemma(const ExperimentConfig& cfg) {
  EmitResult em;
  em.header = {"selector", "mu",        "n",    "functional",
               "p_select_m1", "risk_mean", "risk_se", "rate",
               "reps",     "seed",      "config_digest"};
  const Selector sel = selector_by_name(cfg.selector_id);
  const std::string digest = config_digest(cfg);
  const std::vector<DilemmaRow> rows =
      post_selection_risk(sel, cfg.mu_grid, cfg.rate_id, cfg.n_grid, cfg.reps,
                          cfg.seed, cfg.workers, cfg.mu0);
  // One plot series per (mu, functional) pair, in row order.
  for (const auto& r : rows) {
    em.rows.push_back({r.selector, fmt_double(r.mu), std::to_string(r.n),
                       r.functional, fmt_double(r.p_select_m1),
                       fmt_double(r.risk_mean), fmt_double(r.risk_se),
                       r.rate_id, std::to_string(r.reps),
                       std::to_string(r.seed), digest});
    const std::string label = r.functional + " mu=" + fmt_double(r.mu);
    PlotSeries* ser = nullptr;
    for (auto& s : em.series)
      if (s.label == label) ser = &s;
    if (!ser) {
      em.series.push_back({label, {}, {}});
      ser = &em.series.back();
    }
    ser->x.push_back(static_cast<double>(r.n));
    ser->y.push_back(r.risk_mean);
  }
  return em;
}

std::string plot_axis_labels(const ExperimentConfig& cfg, std::string* ylab) {
  if (cfg.subcommand == "supermartingale-check") {
    *ylab = "mean Z_n";
    return "n";
  }
  if (cfg.subcommand == "adversary-demo") {
    *ylab = "mean loss ratio";
    return "mean tau";
  }
  *ylab = "estimated risk";
  return "sample size";
}

}  // namespace

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out.good()) {
      out.close();
      std::remove(tmp.c_str());
      throw IoError("failed while writing " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot rename " + tmp + " to " + path);
  }
}

int run_command(const ExperimentConfig& cfg, std::ostream& log) {
  const std::vector<std::string> errs = validate_config(cfg);
  if (!errs.empty()) {
    for (const auto& e : errs) log << "error: " << e << "\n";
    return kExitBadArgs;
  }
  if (cfg.subcommand == "selftest")
    return run_selftest(log) == 0 ? kExitOk : 1;

  const auto t0 = std::chrono::steady_clock::now();
  EmitResult em;
  try {
    if (cfg.subcommand == "risk")
      em = emit_risk(cfg);
    else if (cfg.subcommand == "supermartingale-check")
      em = emit_supermartingale_check(cfg);
    else if (cfg.subcommand == "adversary-demo")
      em = emit_adversary_demo(cfg);
    else
      em = emit_dilemma(cfg);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitBadArgs;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  try {
    atomic_write_file(cfg.out_path, to_csv(em));
    char mf[256];
    std::snprintf(mf, sizeof(mf),
                  "version=%s digest=%s seed=%llu rows=%zu wall_seconds=%.3f\n",
                  kVersion, config_digest(cfg).c_str(),
                  static_cast<unsigned long long>(cfg.seed), em.rows.size(),
                  wall);
    atomic_write_file(cfg.out_path + ".manifest", mf);
    if (!cfg.plot_path.empty()) {
      std::string ylab;
      const std::string xlab = plot_axis_labels(cfg, &ylab);
      atomic_write_file(cfg.plot_path,
                        render_svg(em.series, cfg.subcommand, xlab, ylab));
    }
    if (!cfg.dump_path.empty())
      atomic_write_file(cfg.dump_path, em.dump_text);
  } catch (const IoError& e) {
    log << "io error: " << e.what() << "\n";
    return kExitIoError;
  }
  log << "wrote " << cfg.out_path << " (" << em.rows.size() << " rows, "
      << fmt_tick(wall) << "s)\n";
  if (em.nonfinite > 0) {
    log << "warning: " << em.nonfinite
        << " replications produced non-finite losses\n";
    return kExitNonfinite;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// selftest

namespace {

bool nearly(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

}  // namespace

int run_selftest(std::ostream& log) {
  int failures = 0;
  auto check = [&](bool ok, const char* name) {
    log << (ok ? "ok   - " : "FAIL - ") << name << "\n";
    if (!ok) ++failures;
  };

  // 1. Benchmark rate: unit head, log-log body, eventually non-increasing.
  {
    bool ok = rate_f_loglog(1) == 1.0 && rate_f_loglog(2) == 1.0 &&
              nearly(rate_f_loglog(3), std::log(std::log(3.0)) / 3.0, 1e-15) &&
              rate_f_loglog(4) > rate_f_loglog(3);
    for (std::int64_t n = 6; n < 3000 && ok; ++n)
      ok = rate_f_loglog(n + 1) <= rate_f_loglog(n);
    check(ok, "benchmark rate values and tail monotonicity");
  }

  // 2. Mixture prior weights telescope: sum_{i<=m} 1/(i(i+1)) = 1 - 1/(m+1).
  {
    NeumaierSum s;
    for (std::int64_t i = 1; i <= 1000; ++i) s.add(lil_prior(i, 1.0).gamma);
    check(nearly(s.value(), 1.0 - 1.0 / 1001.0, 1e-12),
          "prior weights telescope");
  }

  // 3. Posterior mean is the n/(n+1)-shrunk MLE.
  {
    const FamilySpec fam = make_gaussian();
    const Trajectory tr = sample_path(fam, {0.3}, 64, 99);
    const EstimatorKind mle = estimator_by_name("mle");
    const EstimatorKind pm = estimator_by_name("posterior_mean");
    bool ok = true;
    for (std::int64_t n = 1; n <= 64 && ok; ++n) {
      const double a = estimate_prefix(mle, fam, tr, n)[0];
      const double b = estimate_prefix(pm, fam, tr, n)[0];
      ok = nearly(b, a * static_cast<double>(n) / (n + 1.0), 1e-15);
    }
    check(ok, "posterior mean shrinks the MLE by n/(n+1)");
  }

  // 4. Envelope holds at representative (mu, eta) for both families.
  {
    const FamilySpec g = make_gaussian();
    const FamilySpec b = make_bernoulli();
    const EnvelopeResult r1 = envelope_check(g, {0.0}, {3.0}, 0);
    const EnvelopeResult r2 = envelope_check(b, {0.5}, {1.0}, 0);
    check(r1.pass && r2.pass, "envelope bound at spot (mu, eta) pairs");
  }

  // 5. Doubling the mixture head barely moves log Z.
  {
    const MixtureSpec spec = make_mixture(1, 1.0, 9.0);
    Rng rng(7, 0);
    double S = 0.0;
    bool ok = true;
    for (std::int64_t t = 1; t <= 300 && ok; ++t) {
      S += rng.normal();
      const int h = choose_head(spec, std::fabs(S), t, spec.head_floor(t));
      const int h2 = std::min(2 * h, spec.table_size);
      ok = std::fabs(mixture_logZ(spec, S, t, h) -
                     mixture_logZ(spec, S, t, h2)) < 1e-9;
    }
    check(ok, "mixture tail truncation is converged");
  }

  // 6. E[Z_n] <= 1 within 3 SE under the true mean.
  {
    const FamilySpec fam = make_gaussian();
    const MixtureSpec spec = make_mixture(1, fam.sigma, fam.delta);
    const std::vector<double> mu = {0.25};
    const VectorStats vs = run_replications_vector(
        2000, 11, 1, 1, [&](std::int64_t, Rng& rng, double* out) {
          SupermartingaleState st;
          smg_reset(st, spec);
          double obs;
          for (int t = 0; t < 50; ++t) {
            sample_phi(fam, mu.data(), rng, &obs);
            z_update(st, &obs, mu.data());
          }
          out[0] = std::exp(log_z_plus(st));
        });
    const RunningStats& z = vs.stats[0];
    check(z.mean <= 1.0 + 3.0 * z.se(), "mixture is mean-bounded (E[Z] <= 1)");
  }

  // 7. A fixed-time rule reproduces the standard functional bit for bit.
  {
    const FamilySpec fam = make_gaussian();
    const EstimatorKind mle = estimator_by_name("mle");
    const RiskEstimate a =
        standard_risk(fam, {0.5}, mle, rate_f_loglog, 10, 500, 42);
    const RiskEstimate b = weak_risk(fam, {0.5}, mle, parse_rule("fixed:10"),
                                     rate_f_loglog, 500, 42);
    check(a.mean == b.mean && a.se == b.se,
          "weak risk at a fixed time equals standard risk");
  }

  // 8. Strong risk is non-decreasing in the horizon on shared seeds.
  {
    const FamilySpec fam = make_gaussian();
    const EstimatorKind mle = estimator_by_name("mle");
    const std::vector<RiskEstimate> rs = strong_risk_multi(
        fam, {0.0}, mle, rate_f_loglog, {10, 50, 200}, 200, 5);
    check(rs[0].mean <= rs[1].mean && rs[1].mean <= rs[2].mean,
          "strong risk grows with the horizon");
  }

  // 9. Determinism: same seed twice, and 1 vs 3 workers, bit-identical.
  {
    const FamilySpec fam = make_gaussian();
    const EstimatorKind mle = estimator_by_name("mle");
    const RiskEstimate a =
        standard_risk(fam, {1.0}, mle, rate_one, 25, 600, 77, 1);
    const RiskEstimate b =
        standard_risk(fam, {1.0}, mle, rate_one, 25, 600, 77, 1);
    const RiskEstimate c =
        standard_risk(fam, {1.0}, mle, rate_one, 25, 600, 77, 3);
    check(a.mean == b.mean && a.mean == c.mean && a.se == c.se,
          "bit-identical replay across runs and worker counts");
  }

  // 10. Model selection spot decisions and the chi-square tail.
  {
    const SelectionOutcome a = aic_select(0.5, 8, 0.0);   // stat 2 = penalty
    const SelectionOutcome b = bic_select(1.0, 4, 0.0);   // stat 4 > ln 4
    bool ok = !a.chose_m1 && a.statistic == 2.0 && b.chose_m1 &&
              b.post_estimate == 1.0 &&
              nearly(chisq1_tail(2.0), 0.15729920705028513, 1e-12);
    check(ok, "selection decisions and chi-square tail");
  }

  log << (failures == 0 ? "selftest passed" : "selftest FAILED") << " ("
      << (10 - failures) << "/10)\n";
  return failures;
}

}  // namespace timerobust
