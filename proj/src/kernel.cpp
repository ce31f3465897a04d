#include "oscwalk/kernel.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>

namespace oscwalk {

namespace {

std::vector<std::pair<long long, double>> sorted_entries(
    const std::map<long long, double>& acc) {
  std::vector<std::pair<long long, double>> out(acc.begin(), acc.end());
  return out;
}

// Crossing row shared by the single-row and matrix entry points. The caller
// guarantees x is a crossing state and that the potential covers it.
KernelRow crossing_row_impl(const LatticeMeasure& mu,
                            const LatticeMeasure& mu_prime, long long x,
                            double eps_mass, const Potential& u_plus,
                            const Potential& u_minus) {
  KernelRow row;
  row.source = x;
  std::map<long long, double> acc;
  if (x < 0) {
    Truncation steps = mu.truncate(eps_mass);
    for (long long t = 0; t <= -x - 1; ++t) {
      double ut = u_plus.at(t);
      if (ut == 0.0) continue;
      for (const Atom& a : steps.atoms) {
        long long y = x + t + a.site;
        if (y >= 0) acc[y] += ut * a.mass;
      }
    }
  } else {
    Truncation steps = mu_prime.truncate(eps_mass);
    for (long long t = -x; t <= 0; ++t) {
      double ut = u_minus.at(t);
      if (ut == 0.0) continue;
      for (const Atom& a : steps.atoms) {
        long long y = x + t + a.site;
        if (y <= -1) acc[y] += ut * a.mass;
      }
    }
  }
  row.entries = sorted_entries(acc);
  row.lost_mass = std::max(0.0, 1.0 - row.sum());
  return row;
}

}  // namespace

double KernelRow::sum() const {
  double s = 0.0;
  for (const auto& [y, p] : entries) s += p;
  return s;
}

double KernelRow::at(long long y) const {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), y,
      [](const std::pair<long long, double>& e, long long t) {
        return e.first < t;
      });
  return (it != entries.end() && it->first == y) ? it->second : 0.0;
}

KernelRow full_kernel_row(const LatticeMeasure& mu,
                          const LatticeMeasure& mu_prime, double alpha,
                          long long x, double eps_mass) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("full_kernel_row: alpha outside [0, 1]");
  KernelRow row;
  row.source = x;
  std::map<long long, double> acc;
  auto add_from = [&](const LatticeMeasure& m, double weight) {
    if (weight == 0.0) return;
    Truncation tr = m.truncate(eps_mass);
    for (const Atom& a : tr.atoms) acc[x + a.site] += weight * a.mass;
    row.lost_mass += weight * tr.lost_mass;
  };
  if (x <= -1) {
    add_from(mu, 1.0);
  } else if (x >= 1) {
    add_from(mu_prime, 1.0);
  } else {
    add_from(mu, alpha);
    add_from(mu_prime, 1.0 - alpha);
  }
  row.entries = sorted_entries(acc);
  return row;
}

KernelRow crossing_kernel_row(const LatticeMeasure& mu,
                              const LatticeMeasure& mu_prime, long long x,
                              double eps_mass) {
  ClassDecomposition dec = essential_classes_onesided(mu, mu_prime);
  long long r = dec.residue_of(x);
  CrossingClass cc = crossing_class(dec, r, mu, mu_prime);
  if (!cc.contains(x))
    throw std::domain_error(
        "crossing_kernel_row: source is not a crossing state, the "
        "first-crossing row would be defective");
  Potential u_plus = potential(mu, Sign::positive, std::max(0LL, -x - 1));
  Potential u_minus =
      potential(mu_prime, Sign::negative, std::max(0LL, x));
  return crossing_row_impl(mu, mu_prime, x, eps_mass, u_plus, u_minus);
}

const KernelRow* CrossingKernel::row(long long x) const {
  auto it = rows.find(x);
  return it == rows.end() ? nullptr : &it->second;
}

CrossingKernel crossing_kernel_matrix(const LatticeMeasure& mu,
                                      const LatticeMeasure& mu_prime,
                                      Window window, double eps_mass) {
  if (window.empty())
    throw std::invalid_argument("crossing_kernel_matrix: empty window");
  ClassDecomposition dec = essential_classes_onesided(mu, mu_prime);
  CrossingKernel k;
  k.window = window;
  k.delta = dec.delta;
  for (long long r = 0; r < dec.delta; ++r)
    k.crossing.push_back(crossing_class(dec, r, mu, mu_prime));
  k.u_plus = potential(mu, Sign::positive, std::max(0LL, -window.lo - 1));
  k.u_minus = potential(mu_prime, Sign::negative, std::max(0LL, window.hi));
  for (long long x = window.lo; x <= window.hi; ++x) {
    const CrossingClass& cc = k.crossing[static_cast<std::size_t>(
        dec.residue_of(x))];
    if (!cc.contains(x)) continue;
    KernelRow row =
        crossing_row_impl(mu, mu_prime, x, eps_mass, k.u_plus, k.u_minus);
    k.max_row_defect = std::max(k.max_row_defect, row.lost_mass);
    k.rows.emplace(x, std::move(row));
  }
  return k;
}

}  // namespace oscwalk
