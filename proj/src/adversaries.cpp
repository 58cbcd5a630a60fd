#include "timerobust/adversaries.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace timerobust {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t p = s.find(sep, start);
    if (p == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, p - start));
    start = p + 1;
  }
}

std::int64_t parse_i64(const std::string& s, const char* what) {
  std::size_t pos = 0;
  const long long v = std::stoll(s, &pos);
  if (pos != s.size())
    throw std::invalid_argument(std::string("parse_rule: bad ") + what +
                                " value '" + s + "'");
  return v;
}

double parse_f64(const std::string& s, const char* what) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size())
    throw std::invalid_argument(std::string("parse_rule: bad ") + what +
                                " value '" + s + "'");
  return v;
}

[[noreturn]] void fail_menu(const std::string& s) {
  std::string msg = "unknown or malformed rule id: " + s + " (valid:";
  for (const auto& v : rule_id_menu()) msg += " " + v;
  msg += ")";
  throw std::invalid_argument(msg);
}

}  // namespace

std::vector<std::string> rule_id_menu() {
  return {"fixed:N", "lil:c,n0,nmax", "gap:estimator,c,n0,nmax",
          "capped:c,n0,n1"};
}

RuleSpec parse_rule(const std::string& s) {
  RuleSpec r;
  r.id = s;
  if (s.rfind("fixed:", 0) == 0) {
    r.kind = RuleSpec::Kind::Fixed;
    r.fixed_n = parse_i64(s.substr(6), "N");
    if (r.fixed_n < 1)
      throw std::invalid_argument("parse_rule: fixed N must be >= 1");
    return r;
  }
  if (s.rfind("lil:", 0) == 0) {
    r.kind = RuleSpec::Kind::Lil;
    const auto parts = split(s.substr(4), ',');
    if (parts.empty() || parts.size() > 3) fail_menu(s);
    r.c = parse_f64(parts[0], "c");
    if (parts.size() > 1) r.n0 = parse_i64(parts[1], "n0");
    if (parts.size() > 2) r.nmax = parse_i64(parts[2], "nmax");
  } else if (s.rfind("gap:", 0) == 0) {
    r.kind = RuleSpec::Kind::Gap;
    // The estimator id may itself contain ':' or none; the last three
    // comma fields are c, n0, nmax.
    const auto parts = split(s.substr(4), ',');
    if (parts.size() < 4) fail_menu(s);
    const std::size_t m = parts.size();
    std::string est;
    for (std::size_t i = 0; i + 3 < m; ++i) {
      if (!est.empty()) est += ',';
      est += parts[i];
    }
    r.gap_estimator_id = est;
    r.c = parse_f64(parts[m - 3], "c");
    r.n0 = parse_i64(parts[m - 2], "n0");
    r.nmax = parse_i64(parts[m - 1], "nmax");
    (void)estimator_by_name(r.gap_estimator_id);  // validates
  } else if (s.rfind("capped:", 0) == 0) {
    r.kind = RuleSpec::Kind::Capped;
    const auto parts = split(s.substr(7), ',');
    if (parts.size() != 3) fail_menu(s);
    r.c = parse_f64(parts[0], "c");
    r.n0 = parse_i64(parts[1], "n0");
    r.nmax = parse_i64(parts[2], "n1");
  } else {
    fail_menu(s);
  }
  if (r.c <= 0) throw std::invalid_argument("parse_rule: c must be > 0");
  if (r.n0 < 0 || r.nmax <= r.n0)
    throw std::invalid_argument(
        "parse_rule: need 0 <= n0 < nmax (or n1) for rule " + s);
  return r;
}

RuleStream::RuleStream(const RuleSpec& spec, const FamilySpec& fam,
                       double true_mu)
    : spec_(spec), mu_(true_mu) {
  if (spec_.kind == RuleSpec::Kind::Fixed) return;
  if (fam.k != 1 || fam.name.rfind("gaussian", 0) != 0)
    throw std::invalid_argument(
        "rule " + spec_.id +
        " requires the scalar Gaussian family (posterior mean based)");
  if (spec_.needs_true_mu() && !std::isfinite(mu_))
    throw std::invalid_argument("rule " + spec_.id +
                                " needs the true mean but it was withheld");
  const EstimatorKind pm = estimator_by_name("posterior_mean");
  post_ = pm.make_stream(pm);
  post_->reset(fam, nullptr);
  if (spec_.kind == RuleSpec::Kind::Gap) {
    const EstimatorKind ge = estimator_by_name(spec_.gap_estimator_id);
    if (ge.needs_true_mu)
      throw std::invalid_argument(
          "gap rule estimator may not require the true mean");
    gap_est_ = ge.make_stream(ge);
    gap_est_->reset(fam, nullptr);
  }
}

double RuleStream::post_mean() const {
  if (!post_ || n_ == 0) return std::numeric_limits<double>::quiet_NaN();
  double pm;
  post_->current(&pm);
  return pm;
}

double RuleStream::gap_value() const {
  if (!gap_est_ || n_ == 0) return std::numeric_limits<double>::quiet_NaN();
  double ge;
  gap_est_->current(&ge);
  return ge;
}

bool RuleStream::push(const double* phi, double est_under_test) {
  if (stopped()) return true;
  ++n_;
  const std::int64_t n = n_;
  switch (spec_.kind) {
    case RuleSpec::Kind::Fixed:
      if (n == spec_.fixed_n) {
        tau_ = n;
        triggered_ = true;
        cap_ = false;
      }
      return stopped();
    case RuleSpec::Kind::Lil: {
      post_->push(phi);
      if (n > spec_.n0) {
        double pm;
        post_->current(&pm);
        const double d = mu_ - pm;
        if (d * d >= spec_.c * rate_f_loglog(n)) {
          tau_ = n;
          triggered_ = true;
        }
      }
      if (!stopped() && n == spec_.nmax) tau_ = n;
      if (stopped() && tau_ == spec_.nmax) cap_ = true;
      return stopped();
    }
    case RuleSpec::Kind::Gap: {
      post_->push(phi);
      gap_est_->push(phi);
      if (n > spec_.n0) {
        double pm, ge;
        post_->current(&pm);
        gap_est_->current(&ge);
        const double d = pm - ge;
        if (d * d >= 0.5 * spec_.c * rate_f_loglog(n)) {
          tau_ = n;
          triggered_ = true;
        }
      }
      if (!stopped() && n == spec_.nmax) tau_ = n;
      if (stopped() && tau_ == spec_.nmax) cap_ = true;
      return stopped();
    }
    case RuleSpec::Kind::Capped: {
      post_->push(phi);
      // Trigger only strictly inside (n0, n1); n1 itself is the cap.
      if (n > spec_.n0 && n < spec_.nmax) {
        double pm;
        post_->current(&pm);
        const double f = rate_f_loglog(n);
        const double dmu = mu_ - pm;
        const double dest = pm - est_under_test;
        if (dmu * dmu >= spec_.c * f && dest * dest >= 0.5 * spec_.c * f) {
          tau_ = n;
          triggered_ = true;
        }
      }
      if (!stopped() && n == spec_.nmax) {
        tau_ = n;
        cap_ = true;
      }
      return stopped();
    }
  }
  return stopped();
}

}  // namespace timerobust
