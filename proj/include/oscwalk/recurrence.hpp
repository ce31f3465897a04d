#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oscwalk/measure.hpp"

namespace oscwalk {

enum class HypMode { drift, centered, fails };

// (H): E[xi^-] < E[xi^+] <= +inf or E[xi^-] = E[xi^+] < +inf, and the mirror
// statement (H') for mu'.
struct HypothesisFlags {
  HypMode h = HypMode::fails;
  HypMode h_prime = HypMode::fails;

  bool both() const {
    return h != HypMode::fails && h_prime != HypMode::fails;
  }
};

HypothesisFlags hypothesis_check(const LatticeMeasure& mu,
                                 const LatticeMeasure& mu_prime);

enum class Classification { PositiveRecurrent, Recurrent, Unknown };

// Only recurrence-side conclusions are ever drawn; the classifier never
// claims transience.
struct Verdict {
  Classification classification = Classification::Unknown;
  std::string rule_fired = "none";
  double p_used = 0.0;     // Hoelder exponent behind the fired rule
  bool alpha_universal = false;  // verdict lifts to every alpha
  bool per_class = false;        // delta > 1: statement holds per class
  std::map<std::string, double> evidence;
  std::string note;
};

// Decision order: one-sided finite means; two-sided strict drifts with
// finite means; the drift/centered sufficient conditions at the given p
// (rules Thm4.8(a), (b), (c), (c-swap)); the one-sided Hoelder rule Cor4.6;
// then a fallback grid over p in {0.1,...,0.9}; otherwise Unknown.
Verdict classify(const LatticeMeasure& mu, const LatticeMeasure& mu_prime,
                 double p);

struct KempermanEstimate {
  long long h_max = 0;
  long long n_sim = 0;
  long long path_cap = 0;
  std::vector<double> c_hat;        // index h-1 holds C(h)
  std::vector<double> c_se;
  std::vector<double> c_prime_hat;  // index h-1 holds C'(-h)
  std::vector<double> c_prime_se;
  std::vector<double> partial_sums;  // sum_{h<=H} C(h) C'(-h)
  std::vector<double> partial_se;
  double censored_fraction_plus = 0.0;
  double censored_fraction_minus = 0.0;
  bool unreliable = false;  // censoring above 5% on either side
  std::string note;
};

// Monte Carlo renewal-function estimates: C(h) counts visits to h by the mu
// walk along strictly positive paths, C'(-h) counts visits to -h by the mu'
// walk along strictly negative paths. Purely diagnostic; no convergence
// verdict is derived.
KempermanEstimate kemperman_diagnostic(const LatticeMeasure& mu,
                                       const LatticeMeasure& mu_prime,
                                       long long h_max, long long n_sim,
                                       std::uint64_t seed,
                                       long long path_cap = 10000);

}  // namespace oscwalk
