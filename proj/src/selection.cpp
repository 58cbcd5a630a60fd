#include "timerobust/selection.hpp"

#include <cmath>
#include <stdexcept>

#include "timerobust/risk.hpp"
#include "timerobust/rng.hpp"

namespace timerobust {

Selector selector_by_name(const std::string& id) {
  if (id == "aic") return Selector::Aic;
  if (id == "bic") return Selector::Bic;
  throw std::invalid_argument("unknown selector id: " + id +
                              " (valid: aic bic)");
}

std::string selector_name(Selector s) {
  return s == Selector::Aic ? "aic" : "bic";
}

namespace {

SelectionOutcome select_core(double mle_at_n, std::int64_t n, double mu0,
                             double penalty) {
  SelectionOutcome o;
  const double d = mle_at_n - mu0;
  o.statistic = static_cast<double>(n) * d * d;
  o.penalty = penalty;
  o.chose_m1 = o.statistic > penalty;
  o.post_estimate = o.chose_m1 ? mle_at_n : mu0;
  return o;
}

}  // namespace

SelectionOutcome aic_select(double mle_at_n, std::int64_t n, double mu0) {
  if (n < 1) throw std::invalid_argument("aic_select: n must be >= 1");
  return select_core(mle_at_n, n, mu0, 2.0);
}

SelectionOutcome bic_select(double mle_at_n, std::int64_t n, double mu0) {
  if (n < 2)
    throw std::invalid_argument("bic_select: n must be >= 2 (penalty ln n)");
  return select_core(mle_at_n, n, mu0, std::log(static_cast<double>(n)));
}

SelectionOutcome select_prefix(Selector s, const FamilySpec& fam,
                               const Trajectory& tr, std::int64_t n,
                               double mu0) {
  if (fam.k != 1)
    throw std::invalid_argument("selection: scalar family required");
  const EstimatorKind mle = estimator_by_name("mle");
  const double m = estimate_prefix(mle, fam, tr, n)[0];
  return s == Selector::Aic ? aic_select(m, n, mu0) : bic_select(m, n, mu0);
}

namespace {

// Streaming post-selection estimator: MLE if the statistic beats the
// penalty at the current n, else mu0.  BIC has no penalty at n = 1; the
// stream reports mu0 there (M0 by convention).
class PostSelectionStream : public EstimatorStream {
 public:
  PostSelectionStream(Selector s, double mu0) : s_(s), mu0_(mu0) {}
  void reset(const FamilySpec& fam, const double*) override {
    if (fam.k != 1)
      throw std::invalid_argument(
          "post-selection estimator: scalar family required");
    n_ = 0;
    sum_ = NeumaierSum{};
  }
  void push(const double* phi) override {
    ++n_;
    sum_.add(phi[0]);
  }
  void current(double* out) const override {
    if (n_ < 1) throw std::logic_error("post-selection: empty prefix");
    const double mle = sum_.value() / static_cast<double>(n_);
    if (s_ == Selector::Bic && n_ == 1) {
      out[0] = mu0_;
      return;
    }
    const SelectionOutcome o = s_ == Selector::Aic
                                   ? aic_select(mle, n_, mu0_)
                                   : bic_select(mle, n_, mu0_);
    out[0] = o.post_estimate;
  }
  bool chose_m1() const {
    if (s_ == Selector::Bic && n_ == 1) return false;
    const double mle = sum_.value() / static_cast<double>(n_);
    const SelectionOutcome o = s_ == Selector::Aic
                                   ? aic_select(mle, n_, mu0_)
                                   : bic_select(mle, n_, mu0_);
    return o.chose_m1;
  }

 private:
  Selector s_;
  double mu0_;
  std::int64_t n_ = 0;
  NeumaierSum sum_;
};

}  // namespace

std::unique_ptr<EstimatorStream> make_post_selection_stream(Selector s,
                                                            double mu0) {
  return std::make_unique<PostSelectionStream>(s, mu0);
}

std::vector<DilemmaRow> post_selection_risk(
    Selector s, const std::vector<double>& mu_grid, const std::string& rate_id,
    const std::vector<std::int64_t>& n_grid, std::int64_t reps,
    std::uint64_t seed, int workers, double mu0) {
  if (mu_grid.empty() || n_grid.empty())
    throw std::invalid_argument("post_selection_risk: empty grid");
  const RateFn rate = rate_by_name(rate_id);
  const FamilySpec fam = make_gaussian();
  std::vector<DilemmaRow> rows;
  std::uint64_t cell = 0;
  for (const double mu : mu_grid) {
    for (const std::int64_t n : n_grid) {
      if (n < 1)
        throw std::invalid_argument("post_selection_risk: n must be >= 1");
      const std::uint64_t cell_seed = mix_seed(seed, cell++);
      // One simulation per cell: selection frequency at n, the standard
      // risk at n, and the strongly adversarial risk over horizon n.
      VectorStats vs = run_replications_vector(
          reps, cell_seed, workers, 3,
          [&](std::int64_t, Rng& rng, double* out) {
            PostSelectionStream stream(s, mu0);
            stream.reset(fam, nullptr);
            double phi, est;
            double sup = 0.0;
            for (std::int64_t t = 1; t <= n; ++t) {
              phi = mu + rng.normal();
              stream.push(&phi);
              stream.current(&est);
              const double d = mu - est;
              const double ratio = d * d / rate(t);
              if (ratio > sup) sup = ratio;
              if (t == n) {
                out[0] = ratio;
                out[2] = stream.chose_m1() ? 1.0 : 0.0;
              }
            }
            out[1] = sup;
          });
      DilemmaRow base;
      base.selector = selector_name(s);
      base.mu = mu;
      base.n = n;
      base.p_select_m1 = vs.stats[2].mean;
      base.rate_id = rate_id;
      base.reps = reps;
      base.seed = cell_seed;

      DilemmaRow std_row = base;
      std_row.functional = "standard";
      std_row.risk_mean = vs.stats[0].mean;
      std_row.risk_se = vs.stats[0].se();
      rows.push_back(std_row);

      DilemmaRow strong_row = base;
      strong_row.functional = "strong";
      strong_row.risk_mean = vs.stats[1].mean;
      strong_row.risk_se = vs.stats[1].se();
      rows.push_back(strong_row);
    }
  }
  return rows;
}

}  // namespace timerobust
