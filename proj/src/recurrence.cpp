#include "oscwalk/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "oscwalk/invariant.hpp"
#include "oscwalk/rng.hpp"
#include "oscwalk/simulate.hpp"

namespace oscwalk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCenteredTol = 1e-9;

struct PartMeans {
  double pos;  // E[xi^+]
  double neg;  // E[xi^-]
};

PartMeans part_means(const LatticeMeasure& m) {
  return {m.mean_positive_part(), m.mean_negative_part()};
}

// E[xi^-] < E[xi^+] <= +inf
bool drift_up(const PartMeans& m) {
  return std::isfinite(m.neg) && m.neg < m.pos;
}

// E[xi^+] < E[xi^-] <= +inf
bool drift_down(const PartMeans& m) {
  return std::isfinite(m.pos) && m.pos < m.neg;
}

bool centered(const PartMeans& m) {
  return std::isfinite(m.pos) && std::isfinite(m.neg) &&
         std::abs(m.pos - m.neg) <= kCenteredTol;
}

struct BranchInputs {
  const LatticeMeasure& mu;
  const LatticeMeasure& mu_prime;
  PartMeans a;   // mu
  PartMeans ap;  // mu'
  bool one_sided;
};

// Returns the fired rule name at this p, or "" when nothing applies.
std::string try_rules(const BranchInputs& in, double p) {
  double q = 1.0 - p;
  auto mom = [](const LatticeMeasure& m, double e, Sign side) {
    return m.one_sided_moment(e, side);
  };
  bool mu_drift = drift_up(in.a);
  bool mu_centered = centered(in.a);
  bool mup_drift = drift_down(in.ap);
  bool mup_centered = centered(in.ap);
  if (mu_drift && mup_drift &&
      std::isfinite(mom(in.mu, p, Sign::positive)) &&
      std::isfinite(mom(in.mu_prime, q, Sign::negative)))
    return "Thm4.8(a)";
  if (mu_centered && mup_centered &&
      std::isfinite(mom(in.mu, 1.0 + p, Sign::positive)) &&
      std::isfinite(mom(in.mu_prime, 1.0 + q, Sign::negative)))
    return "Thm4.8(b)";
  if (mu_drift && mup_centered &&
      std::isfinite(mom(in.mu, p, Sign::positive)) &&
      std::isfinite(mom(in.mu_prime, 1.0 + q, Sign::negative)))
    return "Thm4.8(c)";
  if (mu_centered && mup_drift &&
      std::isfinite(mom(in.mu, 1.0 + p, Sign::positive)) &&
      std::isfinite(mom(in.mu_prime, q, Sign::negative)))
    return "Thm4.8(c-swap)";
  if (in.one_sided && std::isfinite(in.mu.moment(p)) &&
      std::isfinite(in.mu_prime.moment(q)))
    return "Cor4.6";
  return "";
}

}  // namespace

HypothesisFlags hypothesis_check(const LatticeMeasure& mu,
                                 const LatticeMeasure& mu_prime) {
  HypothesisFlags f;
  PartMeans a = part_means(mu);
  PartMeans ap = part_means(mu_prime);
  if (drift_up(a))
    f.h = HypMode::drift;
  else if (centered(a))
    f.h = HypMode::centered;
  if (drift_down(ap))
    f.h_prime = HypMode::drift;
  else if (centered(ap))
    f.h_prime = HypMode::centered;
  return f;
}

Verdict classify(const LatticeMeasure& mu, const LatticeMeasure& mu_prime,
                 double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("classify: p must lie in (0, 1)");
  Verdict v;
  v.p_used = p;
  PartMeans a = part_means(mu);
  PartMeans ap = part_means(mu_prime);
  bool one_sided = mu.strictly_positive() && mu_prime.strictly_negative();
  BranchInputs in{mu, mu_prime, a, ap, one_sided};

  v.evidence["E_xi_plus"] = a.pos;
  v.evidence["E_xi_minus"] = a.neg;
  v.evidence["E_xip_plus"] = ap.pos;
  v.evidence["E_xip_minus"] = ap.neg;

  long long d = mu.support_summary().gcd;
  long long dp = mu_prime.support_summary().gcd;
  long long delta = std::gcd(d, dp);
  v.evidence["delta"] = double(delta);
  if (delta > 1) {
    v.per_class = true;
    v.note = "delta > 1: the statement applies to each essential class. ";
  }

  auto lift = [&](double fired_p) {
    // the lift corollary applies whenever a drift/centered sufficient
    // condition holds at some exponent
    for (double g :
         {fired_p, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
      std::string r = try_rules(in, g);
      if (!r.empty() && r != "Cor4.6") return true;
    }
    return false;
  };

  if (one_sided && std::isfinite(a.pos) && std::isfinite(ap.neg)) {
    v.classification = Classification::PositiveRecurrent;
    v.rule_fired = "Cor2.3";
    v.alpha_universal = lift(p);
    v.note += "one-sided supports with finite first moments";
    return v;
  }
  if (drift_up(a) && std::isfinite(a.pos) && drift_down(ap) &&
      std::isfinite(ap.neg)) {
    v.classification = Classification::PositiveRecurrent;
    v.rule_fired = "Thm4.8-Remark";
    v.alpha_universal = lift(p);
    v.note += "strict drifts with finite means on both sides";
    return v;
  }

  std::string rule = try_rules(in, p);
  double fired_p = p;
  if (rule.empty()) {
    for (double g : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
      if (g == p) continue;
      rule = try_rules(in, g);
      if (!rule.empty()) {
        fired_p = g;
        break;
      }
    }
  }
  if (!rule.empty()) {
    v.classification = Classification::Recurrent;
    v.rule_fired = rule;
    v.p_used = fired_p;
    v.evidence["holder_p"] = fired_p;
    v.evidence["holder_q"] = 1.0 - fired_p;
    v.evidence["E_xi_plus_pow_p"] =
        mu.one_sided_moment(fired_p, Sign::positive);
    v.evidence["E_xip_minus_pow_q"] =
        mu_prime.one_sided_moment(1.0 - fired_p, Sign::negative);
    v.alpha_universal = rule != "Cor4.6" || lift(fired_p);
    if (fired_p != p) {
      std::ostringstream os;
      os << "fired at p = " << fired_p << " from the fallback grid. ";
      v.note += os.str();
    }
    if (v.alpha_universal)
      v.note += "recurrent for every alpha by the lift corollary";
    return v;
  }

  v.classification = Classification::Unknown;
  v.rule_fired = "none";
  v.note += "no sufficient condition fired at any grid exponent";
  TailSumResult ts = tail_sum(mu, mu_prime, 2000, 1e-9);
  v.evidence["tail_sum_partial"] = ts.value;
  v.evidence["tail_sum_diverging"] =
      ts.verdict == SeriesVerdict::diverging ? 1.0 : 0.0;
  if (ts.verdict == SeriesVerdict::diverging)
    v.note += "; the mass series carries a divergence certificate";
  return v;
}

KempermanEstimate kemperman_diagnostic(const LatticeMeasure& mu,
                                       const LatticeMeasure& mu_prime,
                                       long long h_max, long long n_sim,
                                       std::uint64_t seed,
                                       long long path_cap) {
  if (h_max < 1) throw std::invalid_argument("kemperman: h_max < 1");
  if (n_sim < 1) throw std::invalid_argument("kemperman: n_sim < 1");
  if (path_cap < 1) throw std::invalid_argument("kemperman: path_cap < 1");
  KempermanEstimate est;
  est.h_max = h_max;
  est.n_sim = n_sim;
  est.path_cap = path_cap;
  std::size_t hs = static_cast<std::size_t>(h_max);

  // one pass per side: visits to h along paths that stay strictly one-signed
  auto run_side = [&](const LatticeMeasure& law, bool positive,
                      std::uint64_t stream, std::vector<double>& mean,
                      std::vector<double>& se, double& censored_fraction) {
    Sampler sampler(law);
    CounterRng rng(seed, stream);
    std::vector<double> acc(hs, 0.0), acc2(hs, 0.0);
    std::vector<long long> visits(hs);
    long long censored = 0;
    for (long long i = 0; i < n_sim; ++i) {
      std::fill(visits.begin(), visits.end(), 0);
      long long s = 0;
      bool alive = true;
      for (long long n = 0; n < path_cap; ++n) {
        s += sampler.draw(rng);
        if (positive ? s <= 0 : s >= 0) {
          alive = false;
          break;
        }
        long long level = positive ? s : -s;
        if (level <= h_max) ++visits[static_cast<std::size_t>(level - 1)];
      }
      if (alive) ++censored;
      for (std::size_t j = 0; j < hs; ++j) {
        acc[j] += double(visits[j]);
        acc2[j] += double(visits[j]) * double(visits[j]);
      }
    }
    mean.resize(hs);
    se.resize(hs);
    for (std::size_t j = 0; j < hs; ++j) {
      mean[j] = acc[j] / double(n_sim);
      double var = std::max(0.0, acc2[j] / double(n_sim) - mean[j] * mean[j]);
      se[j] = std::sqrt(var / double(n_sim));
    }
    censored_fraction = double(censored) / double(n_sim);
  };

  run_side(mu, true, 101, est.c_hat, est.c_se, est.censored_fraction_plus);
  run_side(mu_prime, false, 102, est.c_prime_hat, est.c_prime_se,
           est.censored_fraction_minus);

  est.partial_sums.resize(hs);
  est.partial_se.resize(hs);
  double s = 0.0, var = 0.0;
  for (std::size_t j = 0; j < hs; ++j) {
    s += est.c_hat[j] * est.c_prime_hat[j];
    double term_var =
        est.c_hat[j] * est.c_hat[j] * est.c_prime_se[j] * est.c_prime_se[j] +
        est.c_prime_hat[j] * est.c_prime_hat[j] * est.c_se[j] * est.c_se[j];
    var += term_var;
    est.partial_sums[j] = s;
    est.partial_se[j] = std::sqrt(var);
  }
  est.unreliable = est.censored_fraction_plus > 0.05 ||
                   est.censored_fraction_minus > 0.05;
  est.note =
      "diagnostic only; C'(-h) follows the strictly negative path "
      "convention, visits counted up to the path cap";
  return est;
}

}  // namespace oscwalk
