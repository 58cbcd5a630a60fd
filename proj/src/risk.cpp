#include "timerobust/risk.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace timerobust {

namespace {

constexpr std::int64_t kBlock = 4096;

struct ScalarBlock {
  RunningStats all;
  RunningStats trig;
  NeumaierSum tau_sum;
  std::int64_t caps = 0;
  std::int64_t trigs = 0;
  std::int64_t nonfinite = 0;
};

int clamp_workers(int workers) {
  if (workers < 1) workers = 1;
  if (workers > 256) workers = 256;
  return workers;
}

template <class BlockT, class PerRep>
void run_blocks(std::int64_t reps, int workers, std::vector<BlockT>& blocks,
                const PerRep& per_rep) {
  const std::int64_t n_blocks =
      (reps + kBlock - 1) / kBlock;
  blocks.assign(static_cast<std::size_t>(n_blocks), BlockT{});
  workers = clamp_workers(workers);
  std::atomic<std::int64_t> next{0};
  auto work = [&]() {
    while (true) {
      const std::int64_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      const std::int64_t lo = b * kBlock;
      const std::int64_t hi = std::min(reps, lo + kBlock);
      for (std::int64_t r = lo; r < hi; ++r)
        per_rep(r, blocks[static_cast<std::size_t>(b)]);
    }
  };
  if (workers == 1 || n_blocks == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    const int use = static_cast<int>(
        std::min<std::int64_t>(workers, n_blocks));
    pool.reserve(static_cast<std::size_t>(use));
    for (int w = 0; w < use; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
}

void validate_mu(const FamilySpec& fam, const std::vector<double>& mu) {
  if (static_cast<int>(mu.size()) != fam.k)
    throw std::invalid_argument("risk: mu dimension mismatch");
  if (!fam.mu_in_box(mu.data()))
    throw std::invalid_argument("risk: mu outside the family's M box");
}

double loss_sq(const double* mu, const double* est, int k) {
  double d2 = 0.0;
  for (int j = 0; j < k; ++j) {
    const double d = mu[j] - est[j];
    d2 += d * d;
  }
  return d2;
}

}  // namespace

RiskEstimate run_replications(
    std::int64_t reps, std::uint64_t seed, int workers,
    const std::function<RepOutcome(std::int64_t, Rng&)>& sim,
    std::vector<RepOutcome>* dump) {
  if (reps < 2) throw std::invalid_argument("risk: reps must be >= 2");
  if (dump) dump->assign(static_cast<std::size_t>(reps), RepOutcome{});
  std::vector<ScalarBlock> blocks;
  run_blocks(reps, workers, blocks, [&](std::int64_t r, ScalarBlock& blk) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    const RepOutcome out = sim(r, rng);
    blk.all.push(out.loss);
    if (out.triggered) {
      blk.trig.push(out.loss);
      ++blk.trigs;
    }
    if (out.cap) ++blk.caps;
    if (!std::isfinite(out.loss)) ++blk.nonfinite;
    blk.tau_sum.add(static_cast<double>(out.tau));
    if (dump) (*dump)[static_cast<std::size_t>(r)] = out;
  });
  ScalarBlock total;
  for (const auto& b : blocks) {
    total.all.merge(b.all);
    total.trig.merge(b.trig);
    total.tau_sum.add(b.tau_sum.value());
    total.caps += b.caps;
    total.trigs += b.trigs;
    total.nonfinite += b.nonfinite;
  }
  RiskEstimate est;
  est.mean = total.all.mean;
  est.se = total.all.se();
  est.conditional_mean = total.trig.count > 0
                             ? total.trig.mean
                             : std::numeric_limits<double>::quiet_NaN();
  est.mean_tau = total.tau_sum.value() / static_cast<double>(reps);
  est.reps = reps;
  est.cap_hits = total.caps;
  est.triggered = total.trigs;
  est.nonfinite = total.nonfinite;
  est.seed = seed;
  return est;
}

VectorStats run_replications_vector(
    std::int64_t reps, std::uint64_t seed, int workers, int ns,
    const std::function<void(std::int64_t, Rng&, double*)>& sim) {
  if (reps < 2) throw std::invalid_argument("risk: reps must be >= 2");
  if (ns < 1) throw std::invalid_argument("risk: ns must be >= 1");
  struct VecBlock {
    std::vector<RunningStats> st;
    std::int64_t nonfinite = 0;
  };
  std::vector<VecBlock> blocks;
  run_blocks(reps, workers, blocks, [&](std::int64_t r, VecBlock& blk) {
    if (blk.st.empty()) blk.st.assign(static_cast<std::size_t>(ns), RunningStats{});
    Rng rng(seed, static_cast<std::uint64_t>(r));
    std::vector<double> out(static_cast<std::size_t>(ns), 0.0);
    sim(r, rng, out.data());
    bool bad = false;
    for (int j = 0; j < ns; ++j) {
      blk.st[static_cast<std::size_t>(j)].push(out[static_cast<std::size_t>(j)]);
      if (!std::isfinite(out[static_cast<std::size_t>(j)])) bad = true;
    }
    if (bad) ++blk.nonfinite;
  });
  VectorStats total;
  total.stats.assign(static_cast<std::size_t>(ns), RunningStats{});
  for (const auto& b : blocks) {
    if (b.st.empty()) continue;
    for (int j = 0; j < ns; ++j)
      total.stats[static_cast<std::size_t>(j)].merge(
          b.st[static_cast<std::size_t>(j)]);
    total.nonfinite += b.nonfinite;
  }
  return total;
}

RiskEstimate standard_risk(const FamilySpec& fam, const std::vector<double>& mu,
                           const EstimatorKind& estimator, RateFn rate,
                           std::int64_t n, std::int64_t reps,
                           std::uint64_t seed, int workers,
                           std::vector<RepOutcome>* dump) {
  if (n < 1) throw std::invalid_argument("standard_risk: n must be >= 1");
  validate_mu(fam, mu);
  const double r_n = rate(n);
  return run_replications(
      reps, seed, workers,
      [&](std::int64_t, Rng& rng) {
        auto stream = estimator.make_stream(estimator);
        stream->reset(fam, mu.data());
        std::vector<double> phi(static_cast<std::size_t>(fam.k));
        for (std::int64_t t = 0; t < n; ++t) {
          sample_phi(fam, mu.data(), rng, phi.data());
          stream->push(phi.data());
        }
        std::vector<double> est(static_cast<std::size_t>(fam.k));
        stream->current(est.data());
        RepOutcome out;
        out.loss = loss_sq(mu.data(), est.data(), fam.k) / r_n;
        out.tau = n;
        out.triggered = true;
        return out;
      },
      dump);
}

namespace {

// Shared weak-functional core; mu is fixed (weak) or drawn (bayes).
RepOutcome run_one_weak(const FamilySpec& fam, const double* mu,
                        const EstimatorKind& estimator, const RuleSpec& rule,
                        RateFn rate, Rng& rng) {
  auto stream = estimator.make_stream(estimator);
  stream->reset(fam, mu);
  RuleStream rs(rule, fam, fam.k == 1
                              ? mu[0]
                              : std::numeric_limits<double>::quiet_NaN());
  std::vector<double> phi(static_cast<std::size_t>(fam.k));
  std::vector<double> est(static_cast<std::size_t>(fam.k));
  const std::int64_t cap = rule.horizon_cap();
  for (std::int64_t t = 1; t <= cap; ++t) {
    sample_phi(fam, mu, rng, phi.data());
    stream->push(phi.data());
    stream->current(est.data());
    if (rs.push(phi.data(), est[0])) break;
  }
  RepOutcome out;
  out.tau = rs.tau();
  out.triggered = rs.triggered();
  out.cap = rs.cap_hit();
  out.loss = loss_sq(mu, est.data(), fam.k) / rate(rs.tau());
  return out;
}

}  // namespace

RiskEstimate weak_risk(const FamilySpec& fam, const std::vector<double>& mu,
                       const EstimatorKind& estimator, const RuleSpec& rule,
                       RateFn rate, std::int64_t reps, std::uint64_t seed,
                       int workers, std::vector<RepOutcome>* dump) {
  validate_mu(fam, mu);
  // Surface rule/family incompatibilities before spawning workers.
  { RuleStream probe(rule, fam, fam.k == 1 ? mu[0] : 0.0); }
  return run_replications(
      reps, seed, workers,
      [&](std::int64_t, Rng& rng) {
        return run_one_weak(fam, mu.data(), estimator, rule, rate, rng);
      },
      dump);
}

std::vector<RiskEstimate> strong_risk_multi(
    const FamilySpec& fam, const std::vector<double>& mu,
    const EstimatorKind& estimator, RateFn g,
    const std::vector<std::int64_t>& ns, std::int64_t reps, std::uint64_t seed,
    int workers) {
  if (ns.empty())
    throw std::invalid_argument("strong_risk: at least one horizon");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1)
      throw std::invalid_argument("strong_risk: horizons must be >= 1");
    if (i > 0 && ns[i] <= ns[i - 1])
      throw std::invalid_argument("strong_risk: horizons must be increasing");
  }
  validate_mu(fam, mu);
  const std::int64_t n_max = ns.back();
  const int npts = static_cast<int>(ns.size());
  VectorStats vs = run_replications_vector(
      reps, seed, workers, npts, [&](std::int64_t, Rng& rng, double* out) {
        auto stream = estimator.make_stream(estimator);
        stream->reset(fam, mu.data());
        std::vector<double> phi(static_cast<std::size_t>(fam.k));
        std::vector<double> est(static_cast<std::size_t>(fam.k));
        double sup = 0.0;
        int idx = 0;
        for (std::int64_t t = 1; t <= n_max; ++t) {
          sample_phi(fam, mu.data(), rng, phi.data());
          stream->push(phi.data());
          stream->current(est.data());
          const double ratio = loss_sq(mu.data(), est.data(), fam.k) / g(t);
          if (ratio > sup) sup = ratio;
          if (t == ns[static_cast<std::size_t>(idx)]) {
            out[idx] = sup;
            ++idx;
          }
        }
      });
  std::vector<RiskEstimate> result(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    RiskEstimate& e = result[i];
    e.mean = vs.stats[i].mean;
    e.se = vs.stats[i].se();
    e.conditional_mean = e.mean;
    e.mean_tau = static_cast<double>(ns[i]);
    e.reps = reps;
    e.nonfinite = vs.nonfinite;
    e.triggered = reps;
    e.seed = seed;
  }
  return result;
}

RiskEstimate strong_risk(const FamilySpec& fam, const std::vector<double>& mu,
                         const EstimatorKind& estimator, RateFn g,
                         std::int64_t N, std::int64_t reps, std::uint64_t seed,
                         int workers, std::vector<RepOutcome>* dump) {
  if (dump) {
    // Dump path: scalar driver over full trajectories.
    validate_mu(fam, mu);
    if (N < 1) throw std::invalid_argument("strong_risk: N must be >= 1");
    return run_replications(
        reps, seed, workers,
        [&](std::int64_t, Rng& rng) {
          auto stream = estimator.make_stream(estimator);
          stream->reset(fam, mu.data());
          std::vector<double> phi(static_cast<std::size_t>(fam.k));
          std::vector<double> est(static_cast<std::size_t>(fam.k));
          double sup = 0.0;
          for (std::int64_t t = 1; t <= N; ++t) {
            sample_phi(fam, mu.data(), rng, phi.data());
            stream->push(phi.data());
            stream->current(est.data());
            const double ratio =
                loss_sq(mu.data(), est.data(), fam.k) / g(t);
            if (ratio > sup) sup = ratio;
          }
          RepOutcome out;
          out.loss = sup;
          out.tau = N;
          out.triggered = true;
          return out;
        },
        dump);
  }
  return strong_risk_multi(fam, mu, estimator, g, {N}, reps, seed,
                           workers)[0];
}

RiskEstimate bayes_risk(const FamilySpec& fam, double prior_sd,
                        const EstimatorKind& estimator, const RuleSpec& rule,
                        RateFn rate, std::int64_t reps, std::uint64_t seed,
                        int workers, std::vector<RepOutcome>* dump) {
  if (fam.name.rfind("gaussian", 0) != 0 || fam.k != 1)
    throw std::invalid_argument(
        "bayes_risk: scalar Gaussian family required");
  if (prior_sd <= 0)
    throw std::invalid_argument("bayes_risk: prior sd must be > 0");
  return run_replications(
      reps, seed, workers,
      [&](std::int64_t, Rng& rng) {
        // First draw of the replication stream: the prior sample.
        const double mu_star = prior_sd * rng.normal();
        return run_one_weak(fam, &mu_star, estimator, rule, rate, rng);
      },
      dump);
}

SweepResult mu_sweep(const std::vector<double>& mu_grid,
                     std::uint64_t master_seed,
                     const std::function<RiskEstimate(double, std::uint64_t)>& op) {
  if (mu_grid.empty()) throw std::invalid_argument("mu_sweep: empty grid");
  SweepResult sr;
  sr.estimates.reserve(mu_grid.size());
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    const std::uint64_t point_seed =
        mu_grid.size() == 1 ? master_seed
                            : mix_seed(master_seed, static_cast<std::uint64_t>(i));
    sr.estimates.push_back(op(mu_grid[i], point_seed));
    if (sr.estimates[i].mean > sr.estimates[sr.argmax].mean) sr.argmax = i;
  }
  return sr;
}

}  // namespace timerobust
