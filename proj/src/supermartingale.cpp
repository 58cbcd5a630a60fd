#include "timerobust/supermartingale.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace timerobust {

namespace {

constexpr int kTableSize = 192;   // mixture indices tabulated: 1..192
constexpr int kQMax = 10;         // highest suffix moment used by the tail
constexpr int kTaylorOrder = 5;   // e^eps expanded to this order in the tail
constexpr double kEpsBar = 0.02;  // max |tail exponent| admitted
constexpr double kHeadSkip = 45.0;  // drop head terms this far below the max

const double kInvFact[kTaylorOrder + 1] = {1.0,       1.0,        1.0 / 2.0,
                                           1.0 / 6.0, 1.0 / 24.0, 1.0 / 120.0};

}  // namespace

LilPrior lil_prior(std::int64_t i, double c0) {
  if (i < 1) throw std::invalid_argument("lil_prior: i must be >= 1");
  if (c0 <= 0) throw std::invalid_argument("lil_prior: c0 must be > 0");
  LilPrior p;
  const double di = static_cast<double>(i);
  p.gamma = 1.0 / (di * (di + 1.0));
  p.eta = c0 * std::sqrt(std::log(di * (di + 1.0)) * std::exp(-di));
  return p;
}

double c0_admissible_sup(int k, double delta) {
  if (k < 1 || delta <= 0)
    throw std::invalid_argument("c0_admissible_sup: bad arguments");
  const double dk = delta / static_cast<double>(k);
  // (eta^i)^2 <= delta/k for all i; the binding index is i = 1 where
  // ln(i(i+1))/e^i attains its maximum ln2/e.
  return std::min(dk, std::sqrt(dk * M_E / M_LN2));
}

double default_c0(int k, double delta) {
  return 0.99 * c0_admissible_sup(k, delta);
}

int MixtureSpec::head_floor(std::int64_t n) const {
  const int f =
      static_cast<int>(std::ceil(std::log(static_cast<double>(n)))) + 8;
  return std::min(f, table_size - 1);
}

MixtureSpec make_mixture(int k, double sigma, double delta, double c0) {
  if (k < 1 || k > 16)
    throw std::invalid_argument("make_mixture: k must be in [1, 16]");
  if (sigma <= 0 || delta <= 0)
    throw std::invalid_argument("make_mixture: sigma, delta must be > 0");
  const double sup = c0_admissible_sup(k, delta);
  if (c0 == 0.0) c0 = 0.99 * sup;
  if (c0 <= 0 || c0 > sup)
    throw std::invalid_argument(
        "make_mixture: c0 must lie in (0, min(delta/k, sqrt(delta e / "
        "(k ln 2)))]");

  MixtureSpec sp;
  sp.c0 = c0;
  sp.sigma = sigma;
  sp.delta = delta;
  sp.k = k;
  sp.n_rho = 1 << (k - 1);
  sp.table_size = kTableSize;
  sp.eta.assign(kTableSize + 1, 0.0);
  sp.log_gamma.assign(kTableSize + 1, 0.0);
  sp.a.assign(kTableSize + 1, 0.0);
  for (int i = 1; i <= kTableSize; ++i) {
    const LilPrior p = lil_prior(i, c0);
    sp.eta[i] = p.eta;
    sp.log_gamma[i] = -std::log(static_cast<double>(i)) -
                      std::log(static_cast<double>(i) + 1.0);
    sp.a[i] = 0.5 * sigma * static_cast<double>(k) * p.eta * p.eta;
  }
  sp.suffix.assign(kQMax + 1, std::vector<double>(kTableSize + 1, 0.0));
  // H_0(i) = sum_{j>i} gamma_j = 1/(i+1) exactly, including indices beyond
  // the table.  Higher moments decay like e^{-q i / 2}; the mass beyond the
  // table is below 1e-40 and is dropped.
  for (int i = 0; i <= kTableSize; ++i)
    sp.suffix[0][i] = 1.0 / (static_cast<double>(i) + 1.0);
  // Accumulating from the table end down to i fills suffix[q][i-1] with
  // sum_{j >= i} = H_q(i-1); suffix[q][kTableSize] stays 0.
  for (int q = 1; q <= kQMax; ++q) {
    long double acc = 0.0L;
    for (int i = kTableSize; i >= 1; --i) {
      const long double gamma =
          1.0L /
          (static_cast<long double>(i) * (static_cast<long double>(i) + 1));
      long double etaq = 1.0L;
      for (int t = 0; t < q; ++t) etaq *= static_cast<long double>(sp.eta[i]);
      sp.suffix[q][i - 1] = static_cast<double>(acc += gamma * etaq);
    }
  }
  return sp;
}

int choose_head(const MixtureSpec& spec, double t_abs, std::int64_t n,
                int at_least) {
  int h = std::max(at_least, spec.head_floor(n));
  h = std::min(h, spec.table_size - 1);
  const double nd = static_cast<double>(n);
  while (h < spec.table_size - 1 &&
         spec.eta[h + 1] * t_abs + nd * spec.a[h + 1] > kEpsBar)
    ++h;
  return h;
}

double mixture_logZ(const MixtureSpec& spec, double T, std::int64_t n,
                    int head) {
  if (head < 1 || head > spec.table_size - 1)
    throw std::invalid_argument("mixture_logZ: head outside table");
  const double nd = static_cast<double>(n);
  const double* lg = spec.log_gamma.data();
  const double* eta = spec.eta.data();
  const double* a = spec.a.data();

  double buf[kTableSize + 1];
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= head; ++i) {
    const double e = lg[i] + eta[i] * T - nd * a[i];
    buf[i] = e;
    if (e > mx) mx = e;
  }
  double head_sum = 0.0;
  const double cut = mx - kHeadSkip;
  for (int i = 1; i <= head; ++i)
    if (buf[i] > cut) head_sum += std::exp(buf[i] - mx);

  // Analytic tail: every exponent past the head is within [-0.02, 0.02],
  // so e^eps is a 5th-order polynomial in eps up to relative 1e-13, and
  // eps^p = (eta T - beta eta^2)^p contracts against the suffix moments.
  const double beta = 0.5 * nd * spec.sigma * static_cast<double>(spec.k);
  double tp[kTaylorOrder + 1], bp[kTaylorOrder + 1];
  tp[0] = 1.0;
  bp[0] = 1.0;
  for (int p = 1; p <= kTaylorOrder; ++p) {
    tp[p] = tp[p - 1] * T;
    bp[p] = bp[p - 1] * (-beta);
  }
  double w[kQMax + 1] = {0.0};
  for (int p = 0; p <= kTaylorOrder; ++p)
    for (int j = 0; j <= p; ++j)
      w[p + j] += tp[p - j] * bp[j] * kInvFact[j] * kInvFact[p - j];
  double lump = 0.0;
  for (int q = kQMax; q >= 0; --q) lump += w[q] * spec.suffix[q][head];

  return log_add_exp(mx + std::log(head_sum), std::log(lump));
}

double SupermartingaleState::t_ell1() const {
  double t = 0.0;
  for (const auto& x : s) t += std::abs(x.value());
  return t;
}

double SupermartingaleState::t_rho(int rho_index) const {
  double t = s[0].value();
  for (std::size_t j = 1; j < s.size(); ++j)
    t += ((rho_index >> (j - 1)) & 1) ? -s[j].value() : s[j].value();
  return t;
}

double SupermartingaleState::log_z_at(int rho_index, int side) const {
  return log_z[static_cast<std::size_t>(rho_index) * 2 +
               static_cast<std::size_t>(side)];
}

void smg_reset(SupermartingaleState& st, const MixtureSpec& spec) {
  st.spec = &spec;
  st.n = 0;
  st.s.assign(static_cast<std::size_t>(spec.k), NeumaierSum{});
  st.head = 0;
  st.log_z.assign(static_cast<std::size_t>(spec.n_rho) * 2, 0.0);
  st.log_z_sup.assign(static_cast<std::size_t>(spec.n_rho) * 2, 0.0);
}

void z_update(SupermartingaleState& st, const double* phi, const double* mu) {
  const MixtureSpec& sp = *st.spec;
  for (int j = 0; j < sp.k; ++j) {
    if (!std::isfinite(phi[j]))
      throw std::invalid_argument("z_update: non-finite observation");
    st.s[j].add(phi[j] - mu[j]);
  }
  ++st.n;
  st.head = choose_head(sp, st.t_ell1(), st.n, st.head);
  for (int r = 0; r < sp.n_rho; ++r) {
    const double t = st.t_rho(r);
    const double lzp = mixture_logZ(sp, t, st.n, st.head);
    const double lzm = mixture_logZ(sp, -t, st.n, st.head);
    const std::size_t b = static_cast<std::size_t>(r) * 2;
    st.log_z[b] = lzp;
    st.log_z[b + 1] = lzm;
    if (lzp > st.log_z_sup[b]) st.log_z_sup[b] = lzp;
    if (lzm > st.log_z_sup[b + 1]) st.log_z_sup[b + 1] = lzm;
  }
}

double log_z_plus(const SupermartingaleState& st) { return st.log_z[0]; }

double evalue(const SupermartingaleState& st) {
  return 0.5 * std::exp(0.5 * st.log_z_sup[0]);
}

double pvalue(const SupermartingaleState& st) {
  const double v = std::exp(-st.log_z_sup[0]);
  return v > 1.0 ? 1.0 : v;
}

LilConstants lil_constants(int k, double sigma, double delta) {
  if (k < 1 || sigma <= 0 || delta <= 0)
    throw std::invalid_argument("lil_constants: inputs must be positive");
  LilConstants c;
  c.k1 = 1.5 + (static_cast<double>(k) + 1.0) * M_LN2;
  c.k2 = 18.0 * sigma * static_cast<double>(k);
  c.c = std::min(2.0 * std::sqrt(2.0) * delta / static_cast<double>(k),
                 1.0 / std::sqrt(c.k2));
  c.threshold = (2.0 * c.k2 * c.c * c.c + 3.0) / (2.0 * c.c);
  return c;
}

double strong_risk_ceiling(int k, double sigma, double delta) {
  const LilConstants lc = lil_constants(k, sigma, delta);
  const double c = lc.c;
  return 2.0 / (c * c) * std::exp(lc.k1 + lc.k2 * c * c) +
         (2.0 * lc.k2 * c * c + 3.0) / (2.0 * c);
}

double strong_sup_ratio(const FamilySpec& fam, const Trajectory& tr,
                        const std::vector<double>& mu,
                        const EstimatorKind& estimator, RateFn g,
                        std::int64_t N) {
  if (N < 1) throw std::invalid_argument("strong_sup_ratio: N must be >= 1");
  if (N > tr.n)
    throw std::invalid_argument("strong_sup_ratio: N exceeds trajectory");
  auto stream = estimator.make_stream(estimator);
  stream->reset(fam, mu.data());
  std::vector<double> est(static_cast<std::size_t>(tr.k));
  double best = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) {
    stream->push(tr.row(n - 1));
    stream->current(est.data());
    double d2 = 0.0;
    for (int j = 0; j < tr.k; ++j) {
      const double d = mu[static_cast<std::size_t>(j)] - est[static_cast<std::size_t>(j)];
      d2 += d * d;
    }
    const double ratio = d2 / g(n);
    if (ratio > best) best = ratio;
  }
  return best;
}

}  // namespace timerobust
