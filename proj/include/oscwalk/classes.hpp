#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscwalk/measure.hpp"

namespace oscwalk {

// Raised when the analytic decomposition theorems do not apply
// (e.g. two-sided supports with d == d'); callers fall back to the
// reachability oracle.
struct NotCoveredError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Arithmetic pattern {band_lo..band_hi} + step*k with k >= 0 (upward) or
// k <= 0 (downward).
struct ExcludedBand {
  long long band_lo = 0;
  long long band_hi = -1;
  long long step = 1;
  bool upward = true;

  bool contains(long long x) const;
};

// One essential class: {x = residue mod delta} intersect [lower, upper],
// minus finite exclusions and an optional patterned exclusion.
struct ClassDescriptor {
  long long residue = 0;
  long long delta = 1;
  std::optional<long long> lower;  // nullopt: -inf
  std::optional<long long> upper;  // nullopt: +inf
  std::vector<long long> excluded;
  std::optional<ExcludedBand> excluded_band;

  bool contains(long long x) const;
  std::vector<long long> enumerate(Window w) const;
};

// Irreducible class of a transient state: singleton, or the arithmetic
// orbit (anchor + step*Z) intersected with a half line.
struct TransientOrbit {
  long long anchor = 0;
  long long step = 0;  // 0: singleton
  bool upward = true;
  std::optional<long long> bound;  // [bound, +inf) or (-inf, bound]
};

struct ClassDecomposition {
  long long delta = 1;
  std::vector<ClassDescriptor> classes;  // index == residue
  // General-case transient pattern (empty for the one-sided theorem).
  std::optional<ExcludedBand> transient_band;
  long long transient_step = 0;  // d' (low band) or d (high band)

  long long residue_of(long long x) const { return floor_mod(x, delta); }
  bool is_transient(long long x) const;
  long long absorbed_residue(long long x) const { return residue_of(x); }
  TransientOrbit transient_orbit(long long x) const;
};

// Subset of one side of an essential class.
struct SetDescriptor {
  long long residue = 0;
  long long delta = 1;
  std::optional<long long> lower;
  std::optional<long long> upper;
  std::vector<long long> excluded;

  bool contains(long long x) const;
  std::vector<long long> enumerate(Window w) const;
};

struct CrossingClass {
  long long residue = 0;
  long long delta = 1;
  SetDescriptor plus_side;              // crossing states >= 0
  SetDescriptor minus_side;             // crossing states <= -1
  std::vector<long long> noncrossing;   // N(r), sorted

  bool contains(long long x) const;
};

// Decomposition for strictly one-sided supports (mu on Z+, mu' on Z-).
ClassDecomposition essential_classes_onesided(const LatticeMeasure& mu,
                                              const LatticeMeasure& mu_prime);

// Decomposition for two-sided supports with all four sign parts nonempty
// and d != d'. Throws NotCoveredError outside that regime.
ClassDecomposition essential_classes_general(const LatticeMeasure& mu,
                                             const LatticeMeasure& mu_prime);

struct DecompositionOutcome {
  bool covered = false;
  std::string route;  // "one-sided", "general" or "oracle"
  std::optional<ClassDecomposition> decomposition;
  std::string not_covered_reason;
};

// Tries the one-sided theorem, then the general one; reports NotCovered
// reasons instead of throwing.
DecompositionOutcome decompose(const LatticeMeasure& mu,
                               const LatticeMeasure& mu_prime);

// Crossing classes of the essential class with residue r (one-sided
// setting only).
CrossingClass crossing_class(const ClassDecomposition& decomposition,
                             long long r, const LatticeMeasure& mu,
                             const LatticeMeasure& mu_prime);

// Brute-force decomposition over a finite window: directed jump graph,
// Tarjan SCC, sink detection. Truncated parametric supports are treated
// as exact; states whose jumps exit the window are flagged unreliable.
struct OracleResult {
  Window window;
  long long margin = 0;          // max |jump| used for the interior notion
  int n_scc = 0;
  std::vector<int> scc_id;       // per site, window order
  std::vector<char> reliable;    // per site
  std::vector<char> scc_essential;  // per scc: sink with reliable members
  std::vector<int> absorbed_scc;    // per site: unique reachable essential
                                    // scc, -1 when none or ambiguous

  bool interior(long long x, long long extra_margin = 0) const;
  int scc_of(long long x) const;
  bool essential_member(long long x) const;
};

OracleResult reachability_oracle(const LatticeMeasure& mu,
                                 const LatticeMeasure& mu_prime, double alpha,
                                 Window window, long long max_hops = 10000000,
                                 double eps_mass = 1e-9);

// Checks an analytic decomposition against the oracle on interior states
// (margin widened by extra_margin jumps); returns an empty string on
// agreement, else a diagnostic.
std::string compare_with_oracle(const ClassDecomposition& d,
                                const OracleResult& o,
                                long long extra_margin = 0);

}  // namespace oscwalk
