#pragma once

#include <map>
#include <vector>

#include "oscwalk/classes.hpp"
#include "oscwalk/measure.hpp"

namespace oscwalk {

struct KernelRow {
  long long source = 0;
  std::vector<std::pair<long long, double>> entries;  // sorted by target
  double lost_mass = 0.0;

  double sum() const;
  double at(long long y) const;
};

// One-step transition row of the walk at mixing weight alpha: mu below 0,
// mu' above 0, the alpha-mixture at 0.
KernelRow full_kernel_row(const LatticeMeasure& mu,
                          const LatticeMeasure& mu_prime, double alpha,
                          long long x, double eps_mass);

// First-crossing law from x under the alpha = 0 convention (state 0 sits on
// the nonnegative side and moves by mu'). x must be a crossing state of its
// essential class, otherwise the row is defective and the call throws.
KernelRow crossing_kernel_row(const LatticeMeasure& mu,
                              const LatticeMeasure& mu_prime, long long x,
                              double eps_mass);

struct CrossingKernel {
  Window window;
  long long delta = 1;
  std::vector<CrossingClass> crossing;  // per residue
  std::map<long long, KernelRow> rows;  // crossing states inside window
  Potential u_plus;                     // renewal potential of mu
  Potential u_minus;                    // renewal potential of mu'
  double max_row_defect = 0.0;

  const KernelRow* row(long long x) const;
};

// Rows for every crossing state in the window; the two potentials are
// computed once at window scale and shared.
CrossingKernel crossing_kernel_matrix(const LatticeMeasure& mu,
                                      const LatticeMeasure& mu_prime,
                                      Window window, double eps_mass);

}  // namespace oscwalk
