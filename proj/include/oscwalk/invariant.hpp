#pragma once

#include <string>
#include <vector>

#include "oscwalk/kernel.hpp"
#include "oscwalk/measure.hpp"

namespace oscwalk {

// Which side of the lattice state 0 is grouped with. zero_positive is the
// measure left invariant by the alpha = 0 walk, zero_negative by alpha = 1.
enum class NuConvention { zero_positive, zero_negative };

// Invariant measure of the full walk, nu(m) = mu'((-inf, m]) on the negative
// side and mu((m, +inf)) shifted by the convention on the other side.
// Normalization: nu(0) = 1 under zero_positive.
ZMeasure nu(const LatticeMeasure& mu, const LatticeMeasure& mu_prime,
            NuConvention conv, Window window);

// Invariant measure of the first-crossing chain, computed from the exact
// tail expressions. Entries outside the crossing classes vanish.
ZMeasure rho(const LatticeMeasure& mu, const LatticeMeasure& mu_prime,
             Window window, double eps_mass);

// rho obtained from nu by the one-step defect identity
//   rho(n) = nu(n) - sum_k mu'(-k) nu(n+k)   (n >= 0)
//   rho(n) = nu(n) - sum_k mu(k)  nu(n-k)    (n <= -1).
ZMeasure rho_from_nu(const LatticeMeasure& mu, const LatticeMeasure& mu_prime,
                     const ZMeasure& nu_m, Window window);

// nu recovered from rho through the renewal potentials,
//   nu(n) = sum_k U'(-k) rho(n+k) (n >= 0), sum_k U(k) rho(n-k) (n < 0).
// The potentials must cover the span of the rho window.
ZMeasure nu_from_rho(const ZMeasure& rho_m, const Potential& u_plus,
                     const Potential& u_minus, Window window);

enum class SeriesVerdict { converged, diverging, inconclusive };

struct TailSumResult {
  std::vector<double> partial_sums;  // S_0 .. S_{n_max}
  double value = 0.0;                // last partial sum
  double remainder_bound = 0.0;      // +inf when no certificate
  SeriesVerdict verdict = SeriesVerdict::inconclusive;
  std::string note;
};

// sum_{n >= 0} H(n) H'(-n) with H(n) = mu((n, +inf)), H'(-n) = mu'((-inf, -n)).
// Certifies convergence via a product tail bound and divergence for a pair
// of power tails with s + s' <= 3.
TailSumResult tail_sum(const LatticeMeasure& mu,
                       const LatticeMeasure& mu_prime, long long n_max,
                       double eps);

struct IdentityResidual {
  double plus = 0.0;   // |sum_{n >= 0} rho(n) - sum H H'|
  double minus = 0.0;  // |sum_{n <= -1} rho(n) - sum H H'|
  double slack = 0.0;  // truncation allowance behind both numbers
};

// Checks that each one-sided total mass of rho equals sum_n H(n) H'(-n).
IdentityResidual total_mass_identity_check(const LatticeMeasure& mu,
                                           const LatticeMeasure& mu_prime,
                                           Window window, double eps_mass);

struct StationarityResidual {
  double interior = 0.0;  // l1 defect over sites fed entirely in-window
  double boundary = 0.0;  // defect attributable to edges and truncation
  Window interior_window;
};

// ||m P - m||_1 for the full kernel at mixing weight alpha, split into the
// window interior (every contributing source lies in the window) and the
// boundary remainder.
StationarityResidual stationarity_residual(const ZMeasure& m,
                                           const LatticeMeasure& mu,
                                           const LatticeMeasure& mu_prime,
                                           double alpha, double eps_mass);

// Same defect for the first-crossing kernel; m should be supported on the
// crossing states (use restrict_to_crossing).
StationarityResidual stationarity_residual(const ZMeasure& m,
                                           const CrossingKernel& kernel);

// Zeroes every entry outside the crossing classes.
ZMeasure restrict_to_crossing(const ZMeasure& m,
                              const std::vector<CrossingClass>& crossing);

// Finite-support cross-check: lazy power iteration on the essential class
// of `start`, returning the normalized stationary vector.
ZMeasure power_iteration_limit(const LatticeMeasure& mu,
                               const LatticeMeasure& mu_prime, double alpha,
                               long long start, double tol, int max_iter);

}  // namespace oscwalk
