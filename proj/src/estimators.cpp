#include "timerobust/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "timerobust/numeric.hpp"
#include "timerobust/selection.hpp"

namespace timerobust {

namespace {

bool is_gaussian_like(const FamilySpec& fam) {
  return fam.name.rfind("gaussian", 0) == 0;
}

class MleStream : public EstimatorStream {
 public:
  void reset(const FamilySpec& fam, const double*) override {
    k_ = fam.k;
    n_ = 0;
    sums_.assign(static_cast<std::size_t>(k_), NeumaierSum{});
  }
  void push(const double* phi) override {
    ++n_;
    for (int j = 0; j < k_; ++j) sums_[j].add(phi[j]);
  }
  void current(double* out) const override {
    if (n_ < 1) throw std::logic_error("mle: empty prefix");
    for (int j = 0; j < k_; ++j)
      out[j] = sums_[j].value() / static_cast<double>(n_);
  }

 protected:
  int k_ = 1;
  std::int64_t n_ = 0;
  std::vector<NeumaierSum> sums_;
};

class PosteriorMeanStream : public MleStream {
 public:
  void reset(const FamilySpec& fam, const double* mu) override {
    if (!is_gaussian_like(fam))
      throw std::invalid_argument(
          "posterior_mean: defined for the Gaussian location family only");
    MleStream::reset(fam, mu);
  }
  void current(double* out) const override {
    MleStream::current(out);
    const double shrink =
        static_cast<double>(n_) / static_cast<double>(n_ + 1);
    for (int j = 0; j < k_; ++j) out[j] *= shrink;
  }
};

class DyadicStream : public EstimatorStream {
 public:
  explicit DyadicStream(EstimatorKind base) : base_kind_(std::move(base)) {}
  void reset(const FamilySpec& fam, const double* mu) override {
    k_ = fam.k;
    n_ = 0;
    next_snapshot_ = 1;
    base_ = base_kind_.make_stream(base_kind_);
    base_->reset(fam, mu);
    snapshot_.assign(static_cast<std::size_t>(k_), 0.0);
  }
  void push(const double* phi) override {
    ++n_;
    base_->push(phi);
    if (n_ == next_snapshot_) {
      base_->current(snapshot_.data());
      next_snapshot_ *= 2;
    }
  }
  void current(double* out) const override {
    if (n_ < 1) throw std::logic_error("dyadic: empty prefix");
    for (int j = 0; j < k_; ++j) out[j] = snapshot_[j];
  }

 private:
  EstimatorKind base_kind_;
  std::unique_ptr<EstimatorStream> base_;
  std::vector<double> snapshot_;
  int k_ = 1;
  std::int64_t n_ = 0;
  std::int64_t next_snapshot_ = 1;
};

class ConstStream : public EstimatorStream {
 public:
  explicit ConstStream(double v) : v_(v) {}
  void reset(const FamilySpec& fam, const double*) override { k_ = fam.k; }
  void push(const double*) override {}
  void current(double* out) const override {
    for (int j = 0; j < k_; ++j) out[j] = v_;
  }

 private:
  double v_;
  int k_ = 1;
};

class OracleMuStream : public EstimatorStream {
 public:
  void reset(const FamilySpec& fam, const double* mu) override {
    if (mu == nullptr)
      throw std::invalid_argument("oracle_mu: true mean not supplied");
    mu_.assign(mu, mu + fam.k);
  }
  void push(const double*) override {}
  void current(double* out) const override {
    for (std::size_t j = 0; j < mu_.size(); ++j) out[j] = mu_[j];
  }

 private:
  std::vector<double> mu_;
};

// base + sqrt(c * f(n)); scalar families only.  Used as a deliberately
// bad estimator in stopping-rule demonstrations.
template <class Base>
class OffsetStream : public Base {
 public:
  explicit OffsetStream(double c) : c_(c) {}
  void reset(const FamilySpec& fam, const double* mu) override {
    if (fam.k != 1)
      throw std::invalid_argument("offset estimators require k = 1");
    Base::reset(fam, mu);
  }
  void current(double* out) const override {
    Base::current(out);
    out[0] += std::sqrt(c_ * rate_f_loglog(this->n_));
  }

 private:
  double c_;
};

std::int64_t prefix_full(std::int64_t n) { return n; }
std::int64_t prefix_zero(std::int64_t) { return 0; }
std::int64_t prefix_dyadic(std::int64_t n) {
  return std::int64_t{1} << floor_log2(n);
}

}  // namespace

std::vector<std::string> estimator_id_menu() {
  return {"mle",        "posterior_mean",     "dyadic:<base>",
          "const:<v>",  "oracle_mu",          "offset_mle:<c>",
          "offset_posterior:<c>", "post_aic", "post_bic"};
}

EstimatorKind estimator_by_name(const std::string& id) {
  EstimatorKind k;
  k.id = id;
  if (id == "mle") {
    k.prefix_len = &prefix_full;
    k.make_stream = [](const EstimatorKind&) -> std::unique_ptr<EstimatorStream> {
      return std::make_unique<MleStream>();
    };
    return k;
  }
  if (id == "posterior_mean") {
    k.prefix_len = &prefix_full;
    k.make_stream = [](const EstimatorKind&) -> std::unique_ptr<EstimatorStream> {
      return std::make_unique<PosteriorMeanStream>();
    };
    return k;
  }
  if (id.rfind("dyadic:", 0) == 0) {
    k.base_id = id.substr(7);
    EstimatorKind base = estimator_by_name(k.base_id);  // validates
    k.needs_true_mu = base.needs_true_mu;
    k.prefix_len = &prefix_dyadic;
    k.make_stream = [](const EstimatorKind& self) -> std::unique_ptr<EstimatorStream> {
      return std::make_unique<DyadicStream>(estimator_by_name(self.base_id));
    };
    return k;
  }
  if (id.rfind("const:", 0) == 0) {
    k.param = std::stod(id.substr(6));
    k.prefix_len = &prefix_zero;
    k.make_stream = [](const EstimatorKind& self) -> std::unique_ptr<EstimatorStream> {
      return std::make_unique<ConstStream>(self.param);
    };
    return k;
  }
  if (id == "oracle_mu") {
    k.needs_true_mu = true;
    k.prefix_len = &prefix_zero;
    k.make_stream = [](const EstimatorKind&) -> std::unique_ptr<EstimatorStream> {
      return std::make_unique<OracleMuStream>();
    };
    return k;
  }
  if (id.rfind("offset_mle:", 0) == 0) {
    k.param = std::stod(id.substr(11));
    k.prefix_len = &prefix_full;
    k.make_stream = [](const EstimatorKind& self) -> std::unique_ptr<EstimatorStream> {
      return std::make_unique<OffsetStream<MleStream>>(self.param);
    };
    return k;
  }
  if (id.rfind("offset_posterior:", 0) == 0) {
    k.param = std::stod(id.substr(17));
    k.prefix_len = &prefix_full;
    k.make_stream = [](const EstimatorKind& self) -> std::unique_ptr<EstimatorStream> {
      return std::make_unique<OffsetStream<PosteriorMeanStream>>(self.param);
    };
    return k;
  }
  if (id == "post_aic" || id == "post_bic") {
    k.prefix_len = &prefix_full;
    k.make_stream = [](const EstimatorKind& self) -> std::unique_ptr<EstimatorStream> {
      return make_post_selection_stream(self.id == "post_aic" ? Selector::Aic
                                                              : Selector::Bic,
                                        0.0);
    };
    return k;
  }
  std::string msg = "unknown estimator id: " + id + " (valid:";
  for (const auto& v : estimator_id_menu()) msg += " " + v;
  msg += ")";
  throw std::invalid_argument(msg);
}

std::vector<double> estimate_prefix(const EstimatorKind& kind,
                                    const FamilySpec& fam,
                                    const Trajectory& tr, std::int64_t n,
                                    const double* true_mu) {
  if (n < 1) throw std::invalid_argument("estimate_prefix: empty prefix");
  if (n > tr.n)
    throw std::invalid_argument("estimate_prefix: prefix exceeds trajectory");
  if (kind.needs_true_mu && true_mu == nullptr)
    throw std::invalid_argument("estimate_prefix: " + kind.id +
                                " needs the true mean");
  auto stream = kind.make_stream(kind);
  stream->reset(fam, true_mu);
  for (std::int64_t t = 0; t < n; ++t) stream->push(tr.row(t));
  std::vector<double> out(static_cast<std::size_t>(fam.k));
  stream->current(out.data());
  return out;
}

std::vector<double> pi_weights(double alpha, std::int64_t horizon_n) {
  if (alpha <= 0) throw std::invalid_argument("pi_weights: alpha must be > 0");
  if (horizon_n < 1)
    throw std::invalid_argument("pi_weights: horizon must be >= 1");
  const std::int64_t jmax = floor_log2(horizon_n);
  std::vector<double> w(static_cast<std::size_t>(jmax + 1));
  double total = 0.0;
  for (std::int64_t j = 0; j <= jmax; ++j) {
    w[static_cast<std::size_t>(j)] =
        std::pow(static_cast<double>(j + 1), -1.0 - alpha);
    total += w[static_cast<std::size_t>(j)];
  }
  for (auto& x : w) x /= total;
  return w;
}

double pi_weight(std::int64_t j, double alpha, std::int64_t horizon_n) {
  const auto w = pi_weights(alpha, horizon_n);
  if (j < 0 || j >= static_cast<std::int64_t>(w.size()))
    throw std::invalid_argument("pi_weight: j outside horizon blocks");
  return w[static_cast<std::size_t>(j)];
}

}  // namespace timerobust
