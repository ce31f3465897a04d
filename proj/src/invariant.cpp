#include "oscwalk/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace oscwalk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-entry truncation cap for the rho series on heavy-tailed pairs.
constexpr long long kRhoTermCap = 200000;

void require_one_sided(const LatticeMeasure& mu,
                       const LatticeMeasure& mu_prime, const char* who) {
  if (!mu.strictly_positive() || !mu_prime.strictly_negative())
    throw std::domain_error(std::string(who) +
                            ": needs mu strictly positive and mu' strictly "
                            "negative");
}

// G(m) = mu'((-inf, m]).
double lower_cdf(const LatticeMeasure& mu_prime, long long m) {
  return mu_prime.lower_tail(-m - 1);
}

}  // namespace

ZMeasure nu(const LatticeMeasure& mu, const LatticeMeasure& mu_prime,
            NuConvention conv, Window window) {
  require_one_sided(mu, mu_prime, "nu");
  if (window.empty()) throw std::invalid_argument("nu: empty window");
  ZMeasure out = ZMeasure::zeros(window);
  for (long long m = window.lo; m <= window.hi; ++m) {
    double v;
    if (conv == NuConvention::zero_positive)
      v = m <= -1 ? lower_cdf(mu_prime, m) : mu.upper_tail(m);
    else
      v = m <= 0 ? lower_cdf(mu_prime, m - 1) : mu.upper_tail(m - 1);
    out.set(m, v);
  }
  if (conv == NuConvention::zero_positive)
    out.tail_bound = mu.upper_tail_sum_bound(window.hi) +
                     mu_prime.lower_tail_sum_bound(-window.lo - 1);
  else
    out.tail_bound = mu.upper_tail_sum_bound(window.hi - 1) +
                     mu_prime.lower_tail_sum_bound(-window.lo);
  return out;
}

ZMeasure rho(const LatticeMeasure& mu, const LatticeMeasure& mu_prime,
             Window window, double eps_mass) {
  require_one_sided(mu, mu_prime, "rho");
  if (window.empty()) throw std::invalid_argument("rho: empty window");
  ZMeasure out = ZMeasure::zeros(window);
  double entry_err = 0.0;
  const double eps_entry = eps_mass * 1e-2;
  for (long long n = window.lo; n <= window.hi; ++n) {
    double acc;
    if (n >= 0) {
      // rho(n) = H(n) - sum_k mu'(-k) H(n+k)
      acc = mu.upper_tail(n);
      if (mu_prime.is_finite()) {
        for (const Atom& a : mu_prime.atoms())
          acc -= a.mass * mu.upper_tail(n - a.site);
      } else {
        for (long long k = 1;; ++k) {
          double h = mu.upper_tail(n + k);
          if (h == 0.0) break;
          acc -= mu_prime.mass(-k) * h;
          double rem = mu_prime.lower_tail(k) * h;
          if (rem <= eps_entry || k >= kRhoTermCap) {
            entry_err += rem;
            break;
          }
        }
      }
    } else {
      // rho(n) = G(n) - sum_k mu(k) G(n-k)
      acc = lower_cdf(mu_prime, n);
      if (mu.is_finite()) {
        for (const Atom& a : mu.atoms())
          acc -= a.mass * lower_cdf(mu_prime, n - a.site);
      } else {
        for (long long k = 1;; ++k) {
          double g = lower_cdf(mu_prime, n - k);
          if (g == 0.0) break;
          acc -= mu.mass(k) * g;
          double rem = mu.upper_tail(k) * g;
          if (rem <= eps_entry || k >= kRhoTermCap) {
            entry_err += rem;
            break;
          }
        }
      }
    }
    if (acc < 0.0 && acc > -1e-9) acc = 0.0;  // cancellation dust
    out.set(n, acc);
  }
  out.tail_bound = entry_err + mu.upper_tail_sum_bound(window.hi) +
                   mu_prime.lower_tail_sum_bound(-window.lo - 1);
  return out;
}

ZMeasure rho_from_nu(const LatticeMeasure& mu, const LatticeMeasure& mu_prime,
                     const ZMeasure& nu_m, Window window) {
  require_one_sided(mu, mu_prime, "rho_from_nu");
  if (window.empty()) throw std::invalid_argument("rho_from_nu: empty window");
  if (window.lo < nu_m.window.lo || window.hi > nu_m.window.hi)
    throw std::invalid_argument("rho_from_nu: window exceeds the nu window");
  ZMeasure out = ZMeasure::zeros(window);
  double err = 0.0;
  for (long long n = window.lo; n <= window.hi; ++n) {
    double acc = nu_m.at(n);
    if (n >= 0) {
      long long reach = nu_m.window.hi - n;  // largest usable k
      if (mu_prime.is_finite()) {
        for (const Atom& a : mu_prime.atoms()) {
          if (-a.site <= reach)
            acc -= a.mass * nu_m.at(n - a.site);
          else
            err += a.mass * nu_m.at(nu_m.window.hi);
        }
      } else {
        for (long long k = 1; k <= reach; ++k)
          acc -= mu_prime.mass(-k) * nu_m.at(n + k);
        // nu is nonincreasing on the positive side
        err += mu_prime.lower_tail(reach) * nu_m.at(nu_m.window.hi);
      }
    } else {
      long long reach = n - nu_m.window.lo;
      if (mu.is_finite()) {
        for (const Atom& a : mu.atoms()) {
          if (a.site <= reach)
            acc -= a.mass * nu_m.at(n - a.site);
          else
            err += a.mass * nu_m.at(nu_m.window.lo);
        }
      } else {
        for (long long k = 1; k <= reach; ++k)
          acc -= mu.mass(k) * nu_m.at(n - k);
        // nu is nondecreasing on the negative side
        err += mu.upper_tail(reach) * nu_m.at(nu_m.window.lo);
      }
    }
    if (acc < 0.0 && acc > -1e-9) acc = 0.0;
    out.set(n, acc);
  }
  out.tail_bound = nu_m.tail_bound + err;
  return out;
}

ZMeasure nu_from_rho(const ZMeasure& rho_m, const Potential& u_plus,
                     const Potential& u_minus, Window window) {
  if (window.empty()) throw std::invalid_argument("nu_from_rho: empty window");
  if (u_plus.side != Sign::positive || u_minus.side != Sign::negative)
    throw std::invalid_argument("nu_from_rho: potential sides are swapped");
  ZMeasure out = ZMeasure::zeros(window);
  for (long long n = window.lo; n <= window.hi; ++n) {
    double acc = 0.0;
    if (n >= 0) {
      long long k_max = rho_m.window.hi - n;
      if (k_max < 0)
        throw std::invalid_argument(
            "nu_from_rho: window exceeds the rho window");
      if (u_minus.t_max() < k_max)
        throw std::invalid_argument(
            "nu_from_rho: the mu' potential does not cover the rho window "
            "span");
      for (long long k = 0; k <= k_max; ++k)
        acc += u_minus.at(-k) * rho_m.at(n + k);
    } else {
      long long k_max = n - rho_m.window.lo;
      if (k_max < 0)
        throw std::invalid_argument(
            "nu_from_rho: window exceeds the rho window");
      if (u_plus.t_max() < k_max)
        throw std::invalid_argument(
            "nu_from_rho: the mu potential does not cover the rho window "
            "span");
      for (long long k = 0; k <= k_max; ++k)
        acc += u_plus.at(k) * rho_m.at(n - k);
    }
    out.set(n, acc);
  }
  // renewal potentials are probabilities of hitting a fixed level, <= 1
  out.tail_bound = rho_m.tail_bound;
  return out;
}

TailSumResult tail_sum(const LatticeMeasure& mu,
                       const LatticeMeasure& mu_prime, long long n_max,
                       double eps) {
  if (n_max < 0) throw std::invalid_argument("tail_sum: n_max < 0");
  TailSumResult r;
  r.partial_sums.reserve(static_cast<std::size_t>(n_max) + 1);
  double s = 0.0;
  for (long long n = 0; n <= n_max; ++n) {
    s += mu.upper_tail(n) * mu_prime.lower_tail(n);
    r.partial_sums.push_back(s);
  }
  r.value = s;
  double h = mu.upper_tail(n_max + 1);
  double g = mu_prime.lower_tail(n_max + 1);
  if (h == 0.0 || g == 0.0) {
    r.remainder_bound = 0.0;
    r.verdict = SeriesVerdict::converged;
    r.note = "a factor vanishes beyond n_max; the sum is exact";
    return r;
  }
  r.remainder_bound = std::min(g * mu.upper_tail_sum_bound(n_max),
                               h * mu_prime.lower_tail_sum_bound(n_max));
  if (r.remainder_bound <= eps) {
    r.verdict = SeriesVerdict::converged;
    r.note = "product tail bound below eps";
    return r;
  }
  if (mu.kind() == LatticeMeasure::Kind::power &&
      mu_prime.kind() == LatticeMeasure::Kind::power) {
    double se = mu.exponent() + mu_prime.exponent();
    if (se <= 3.0) {
      r.remainder_bound = kInf;
      r.verdict = SeriesVerdict::diverging;
      std::ostringstream os;
      os << "power/power with s + s' = " << se
         << " <= 3: terms dominate c (n+1)^(2 - s - s') with exponent >= -1, "
            "a divergent harmonic comparison";
      r.note = os.str();
      return r;
    }
  }
  r.verdict = SeriesVerdict::inconclusive;
  r.note = "no certificate at this n_max";
  return r;
}

IdentityResidual total_mass_identity_check(const LatticeMeasure& mu,
                                           const LatticeMeasure& mu_prime,
                                           Window window, double eps_mass) {
  require_one_sided(mu, mu_prime, "total_mass_identity_check");
  ZMeasure r = rho(mu, mu_prime, window, eps_mass);
  long long n_max = std::max(window.hi, -window.lo);
  TailSumResult ts = tail_sum(mu, mu_prime, n_max, eps_mass);
  if (ts.verdict == SeriesVerdict::diverging)
    throw std::domain_error(
        "total_mass_identity_check: the mass series diverges, rho has "
        "infinite total mass");
  double plus = 0.0, minus = 0.0;
  for (long long n = window.lo; n <= window.hi; ++n)
    (n >= 0 ? plus : minus) += r.at(n);
  IdentityResidual out;
  out.plus = std::abs(plus - ts.value);
  out.minus = std::abs(minus - ts.value);
  out.slack = r.tail_bound +
              (std::isfinite(ts.remainder_bound) ? ts.remainder_bound : 0.0);
  return out;
}

StationarityResidual stationarity_residual(const ZMeasure& m,
                                           const LatticeMeasure& mu,
                                           const LatticeMeasure& mu_prime,
                                           double alpha, double eps_mass) {
  Window w = m.window;
  if (w.empty())
    throw std::invalid_argument("stationarity_residual: empty window");
  auto jump_range = [&](const LatticeMeasure& mm) {
    Truncation t = mm.truncate(eps_mass);
    return std::pair<long long, long long>{t.atoms.front().site,
                                           t.atoms.back().site};
  };
  auto [mu_lo, mu_hi] = jump_range(mu);
  auto [mup_lo, mup_hi] = jump_range(mu_prime);
  long long j_up = std::max({mu_hi, mup_hi, 0LL});
  long long j_down = std::max({-mu_lo, -mup_lo, 0LL});

  ZMeasure acc = ZMeasure::zeros(w);
  double lost = 0.0;
  for (long long x = w.lo; x <= w.hi; ++x) {
    double mx = m.at(x);
    if (mx == 0.0) continue;
    KernelRow row = full_kernel_row(mu, mu_prime, alpha, x, eps_mass);
    for (const auto& [y, p] : row.entries) acc.add(y, mx * p);
    lost += mx * row.lost_mass;
  }

  StationarityResidual res;
  res.interior_window = Window{w.lo + j_up, w.hi - j_down};
  for (long long y = w.lo; y <= w.hi; ++y) {
    double d = std::abs(acc.at(y) - m.at(y));
    if (res.interior_window.contains(y))
      res.interior += d;
    else
      res.boundary += d;
  }
  res.boundary += m.tail_bound + lost;
  return res;
}

StationarityResidual stationarity_residual(const ZMeasure& m,
                                           const CrossingKernel& kernel) {
  Window w = m.window;
  if (w.empty())
    throw std::invalid_argument("stationarity_residual: empty window");
  ZMeasure acc = ZMeasure::zeros(w);
  double lost = 0.0;
  long long y_min = w.hi + 1, y_max = w.lo - 1;  // empty until a row lands
  for (const auto& [x, row] : kernel.rows) {
    if (!w.contains(x)) continue;
    for (const auto& [y, p] : row.entries) {
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
    double mx = m.at(x);
    if (mx == 0.0) continue;
    for (const auto& [y, p] : row.entries) acc.add(y, mx * p);
    lost += mx * row.lost_mass;
  }

  StationarityResidual res;
  res.interior_window = Window{std::max(w.lo, y_min), std::min(w.hi, y_max)};
  for (long long y = w.lo; y <= w.hi; ++y) {
    double d = std::abs(acc.at(y) - m.at(y));
    if (res.interior_window.contains(y))
      res.interior += d;
    else
      res.boundary += d;
  }
  res.boundary += m.tail_bound + lost;
  return res;
}

ZMeasure restrict_to_crossing(const ZMeasure& m,
                              const std::vector<CrossingClass>& crossing) {
  if (crossing.empty())
    throw std::invalid_argument("restrict_to_crossing: no crossing classes");
  long long delta = crossing.front().delta;
  ZMeasure out = m;
  for (long long x = m.window.lo; x <= m.window.hi; ++x) {
    const CrossingClass& cc =
        crossing[static_cast<std::size_t>(floor_mod(x, delta))];
    if (!cc.contains(x)) out.set(x, 0.0);
  }
  return out;
}

ZMeasure power_iteration_limit(const LatticeMeasure& mu,
                               const LatticeMeasure& mu_prime, double alpha,
                               long long start, double tol, int max_iter) {
  if (!mu.is_finite() || !mu_prime.is_finite())
    throw std::domain_error("power_iteration_limit: finite supports only");
  ClassDecomposition dec = essential_classes_onesided(mu, mu_prime);
  if (dec.is_transient(start))
    throw std::invalid_argument("power_iteration_limit: start is transient");
  const ClassDescriptor& cls =
      dec.classes[static_cast<std::size_t>(dec.residue_of(start))];
  Window cw{*cls.lower, *cls.upper};
  std::vector<long long> members = cls.enumerate(cw);
  std::map<long long, std::size_t> idx;
  for (std::size_t i = 0; i < members.size(); ++i) idx[members[i]] = i;

  std::vector<std::vector<std::pair<std::size_t, double>>> rows(
      members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    KernelRow row = full_kernel_row(mu, mu_prime, alpha, members[i], 0.0);
    for (const auto& [y, p] : row.entries) {
      auto it = idx.find(y);
      if (it == idx.end())
        throw std::logic_error(
            "power_iteration_limit: the class is not closed under the "
            "kernel at this alpha");
      rows[i].emplace_back(it->second, p);
    }
  }

  std::vector<double> v(members.size(), 1.0 / double(members.size()));
  std::vector<double> next(members.size());
  for (int it = 0; it < max_iter; ++it) {
    // lazy step kills periodicity: v' = (v + vP) / 2
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < members.size(); ++i)
      for (const auto& [j, p] : rows[i]) next[j] += v[i] * p;
    double diff = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      next[i] = 0.5 * (next[i] + v[i]);
      diff += std::abs(next[i] - v[i]);
    }
    v.swap(next);
    if (diff <= tol * 0.1) break;
  }
  double total = 0.0;
  for (double x : v) total += x;
  ZMeasure out = ZMeasure::zeros(cw);
  for (std::size_t i = 0; i < members.size(); ++i)
    out.set(members[i], v[i] / total);
  return out;
}

}  // namespace oscwalk
