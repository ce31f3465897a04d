#include "oscwalk/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace oscwalk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long long kPrefixLen = 2048;
constexpr long long kCutoffCap = 1LL << 48;

// Euler-Maclaurin evaluation of sum_{k >= a} k^{-s}; accurate to ~1e-18
// relative for a >= 64, s > 1.
double em_sum_from(double a, double s) {
  double inv = 1.0 / a;
  double fa = std::pow(a, -s);
  double sum = fa * a / (s - 1.0);      // integral_a^inf x^{-s} dx
  sum += 0.5 * fa;                      // + f(a)/2
  sum += s * fa * inv / 12.0;           // - B2/2! f'(a)
  sum -= s * (s + 1.0) * (s + 2.0) * fa * inv * inv * inv / 720.0;
  return sum;
}

// sum_{k>=1} k^{-t} for t > 1, consistent with em_sum_from.
double zeta_series(double t) {
  double acc = 0.0;
  for (long long k = 1; k <= kPrefixLen; ++k) acc += std::pow(double(k), -t);
  return acc + em_sum_from(double(kPrefixLen) + 1.0, t);
}

}  // namespace

double Potential::at(long long t) const {
  long long idx = side == Sign::positive ? t : -t;
  if (idx < 0 || idx >= static_cast<long long>(values.size()))
    throw std::out_of_range("Potential::at: argument outside computed range");
  return values[static_cast<std::size_t>(idx)];
}

ZMeasure ZMeasure::zeros(Window w) {
  if (w.empty()) throw std::invalid_argument("ZMeasure: empty window");
  ZMeasure m;
  m.window = w;
  m.values.assign(static_cast<std::size_t>(w.size()), 0.0);
  return m;
}

double ZMeasure::at(long long site) const {
  if (!window.contains(site)) return 0.0;
  return values[static_cast<std::size_t>(site - window.lo)];
}

void ZMeasure::add(long long site, double v) {
  if (!window.contains(site)) return;
  values[static_cast<std::size_t>(site - window.lo)] += v;
}

void ZMeasure::set(long long site, double v) {
  if (!window.contains(site)) throw std::out_of_range("ZMeasure::set");
  values[static_cast<std::size_t>(site - window.lo)] = v;
}

double ZMeasure::sum() const {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc;
}

LatticeMeasure LatticeMeasure::finite_atoms(std::vector<Atom> atoms) {
  if (atoms.empty())
    throw std::invalid_argument("finite_atoms: empty support");
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.site < b.site; });
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].site == 0)
      throw std::invalid_argument("finite_atoms: site 0 not allowed");
    if (atoms[i].mass <= 0.0)
      throw std::invalid_argument("finite_atoms: masses must be positive");
    if (i > 0 && atoms[i].site == atoms[i - 1].site)
      throw std::invalid_argument("finite_atoms: duplicate site");
    total += atoms[i].mass;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("finite_atoms: masses must sum to 1");
  LatticeMeasure m;
  m.kind_ = Kind::finite;
  m.atoms_ = std::move(atoms);
  return m;
}

LatticeMeasure LatticeMeasure::geometric(Sign sign, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("geometric: ratio must be in (0,1)");
  LatticeMeasure m;
  m.kind_ = Kind::geometric;
  m.sign_ = sign;
  m.param_ = ratio;
  return m;
}

LatticeMeasure LatticeMeasure::power(Sign sign, double exponent) {
  if (!(exponent > 1.0))
    throw std::invalid_argument("power: exponent must exceed 1");
  LatticeMeasure m;
  m.kind_ = Kind::power;
  m.sign_ = sign;
  m.param_ = exponent;
  m.prefix_.assign(kPrefixLen + 1, 0.0);
  for (long long k = 1; k <= kPrefixLen; ++k)
    m.prefix_[static_cast<std::size_t>(k)] =
        m.prefix_[static_cast<std::size_t>(k - 1)] +
        std::pow(double(k), -exponent);
  m.norm_ = m.prefix_[kPrefixLen] + em_sum_from(double(kPrefixLen) + 1.0,
                                                exponent);
  return m;
}

Sign LatticeMeasure::tail_sign() const {
  if (kind_ == Kind::finite)
    throw std::logic_error("tail_sign: finite measure has no tail parameter");
  return sign_;
}

double LatticeMeasure::ratio() const {
  if (kind_ != Kind::geometric) throw std::logic_error("ratio: wrong kind");
  return param_;
}

double LatticeMeasure::exponent() const {
  if (kind_ != Kind::power) throw std::logic_error("exponent: wrong kind");
  return param_;
}

const std::vector<Atom>& LatticeMeasure::atoms() const {
  if (kind_ != Kind::finite) throw std::logic_error("atoms: wrong kind");
  return atoms_;
}

double LatticeMeasure::power_tail_raw(long long n) const {
  // sum_{k > n} k^{-s}; exact prefix differences below kPrefixLen, EM above.
  if (n < 0) n = 0;
  if (n <= kPrefixLen)
    return (norm_ - prefix_[static_cast<std::size_t>(n)]);
  return em_sum_from(double(n) + 1.0, param_);
}

double LatticeMeasure::mass(long long site) const {
  switch (kind_) {
    case Kind::finite: {
      auto it = std::lower_bound(
          atoms_.begin(), atoms_.end(), site,
          [](const Atom& a, long long s) { return a.site < s; });
      return (it != atoms_.end() && it->site == site) ? it->mass : 0.0;
    }
    case Kind::geometric: {
      long long k = sign_ == Sign::positive ? site : -site;
      if (k < 1) return 0.0;
      return (1.0 - param_) * std::pow(param_, double(k - 1));
    }
    case Kind::power: {
      long long k = sign_ == Sign::positive ? site : -site;
      if (k < 1) return 0.0;
      return std::pow(double(k), -param_) / norm_;
    }
  }
  return 0.0;
}

double LatticeMeasure::upper_tail(long long n) const {
  switch (kind_) {
    case Kind::finite: {
      double acc = 0.0;
      for (auto it = atoms_.rbegin(); it != atoms_.rend() && it->site > n;
           ++it)
        acc += it->mass;
      return acc;
    }
    case Kind::geometric:
      if (sign_ == Sign::positive)
        return n < 0 ? 1.0 : std::pow(param_, double(n));
      // sites -k with k >= 1; ]n, inf[ keeps k <= -n-1
      return n >= -1 ? 0.0 : 1.0 - std::pow(param_, double(-n - 1));
    case Kind::power:
      if (sign_ == Sign::positive)
        return n <= 0 ? 1.0 : power_tail_raw(n) / norm_;
      return n >= -1 ? 0.0 : 1.0 - power_tail_raw(-n - 1) / norm_;
  }
  return 0.0;
}

double LatticeMeasure::lower_tail(long long n) const {
  // mass of ]-inf, -n[
  switch (kind_) {
    case Kind::finite: {
      double acc = 0.0;
      for (auto it = atoms_.begin(); it != atoms_.end() && it->site < -n; ++it)
        acc += it->mass;
      return acc;
    }
    case Kind::geometric:
      if (sign_ == Sign::negative)
        return n < 0 ? 1.0 : std::pow(param_, double(n));
      return n < -1 ? 1.0 - std::pow(param_, double(-n - 1)) : 0.0;
    case Kind::power:
      if (sign_ == Sign::negative)
        return n <= 0 ? 1.0 : power_tail_raw(n) / norm_;
      return n < -1 ? 1.0 - power_tail_raw(-n - 1) / norm_ : 0.0;
  }
  return 0.0;
}

double LatticeMeasure::interval_mass(long long lo, long long hi) const {
  if (lo > hi) return 0.0;
  if (kind_ == Kind::finite) {
    double acc = 0.0;
    for (const Atom& a : atoms_)
      if (a.site >= lo && a.site <= hi) acc += a.mass;
    return acc;
  }
  double v = upper_tail(lo - 1) - upper_tail(hi);
  return v > 0.0 ? v : 0.0;
}

SupportSummary LatticeMeasure::support_summary() const {
  SupportSummary s;
  if (kind_ == Kind::finite) {
    s.min_site = atoms_.front().site;
    s.max_site = atoms_.back().site;
    long long g = 0;
    bool pos = false, neg = false;
    for (const Atom& a : atoms_) {
      g = std::gcd(g, a.site < 0 ? -a.site : a.site);
      (a.site > 0 ? pos : neg) = true;
    }
    s.gcd = g;
    s.sign_class = pos && neg ? SignClass::mixed
                   : pos      ? SignClass::strictly_positive
                              : SignClass::strictly_negative;
    return s;
  }
  s.gcd = 1;
  if (sign_ == Sign::positive) {
    s.min_site = 1;
    s.max_site = std::nullopt;
    s.sign_class = SignClass::strictly_positive;
  } else {
    s.max_site = -1;
    s.min_site = std::nullopt;
    s.sign_class = SignClass::strictly_negative;
  }
  return s;
}

bool LatticeMeasure::strictly_positive() const {
  return support_summary().sign_class == SignClass::strictly_positive;
}

bool LatticeMeasure::strictly_negative() const {
  return support_summary().sign_class == SignClass::strictly_negative;
}

double LatticeMeasure::one_sided_moment(double p, Sign side) const {
  if (p < 0.0) throw std::invalid_argument("moment: p must be >= 0");
  switch (kind_) {
    case Kind::finite: {
      double acc = 0.0;
      for (const Atom& a : atoms_) {
        if ((side == Sign::positive) != (a.site > 0)) continue;
        acc += std::pow(double(a.site < 0 ? -a.site : a.site), p) * a.mass;
      }
      return acc;
    }
    case Kind::geometric: {
      if (side != sign_) return 0.0;
      double acc = 0.0;
      for (long long k = 1;; ++k) {
        double term =
            std::pow(double(k), p) * (1.0 - param_) *
            std::pow(param_, double(k - 1));
        acc += term;
        if (k > 32 && term < acc * 1e-18) break;
        if (k > 1000000)
          throw std::runtime_error("geometric moment series did not settle");
      }
      return acc;
    }
    case Kind::power: {
      if (side != sign_) return 0.0;
      // sum k^{p-s} / Z(s): finite iff p < s - 1
      if (p >= param_ - 1.0) return kInf;
      return zeta_series(param_ - p) / norm_;
    }
  }
  return 0.0;
}

double LatticeMeasure::moment(double p) const {
  double a = one_sided_moment(p, Sign::positive);
  double b = one_sided_moment(p, Sign::negative);
  return a + b;
}

double LatticeMeasure::mean_positive_part() const {
  return one_sided_moment(1.0, Sign::positive);
}

double LatticeMeasure::mean_negative_part() const {
  return one_sided_moment(1.0, Sign::negative);
}

long long LatticeMeasure::support_cutoff(double eps_mass) const {
  if (!(eps_mass > 0.0))
    throw std::invalid_argument("support_cutoff: eps_mass must be positive");
  switch (kind_) {
    case Kind::finite: {
      long long m = 0;
      for (const Atom& a : atoms_)
        m = std::max(m, a.site < 0 ? -a.site : a.site);
      return m;
    }
    case Kind::geometric: {
      // smallest K >= 1 with r^K <= eps
      long long k = std::max<long long>(
          1, (long long)std::ceil(std::log(eps_mass) / std::log(param_)));
      while (k > 1 && std::pow(param_, double(k - 1)) <= eps_mass) --k;
      while (std::pow(param_, double(k)) > eps_mass) ++k;
      return k;
    }
    case Kind::power: {
      // smallest K >= 1 with tail(K)/Z <= eps, by bisection on the
      // monotone tail
      double target = eps_mass * norm_;
      if (power_tail_raw(1) <= target) return 1;
      long long lo = 1, hi = 2;
      while (power_tail_raw(hi) > target) {
        if (hi >= kCutoffCap) return kCutoffCap;
        hi *= 2;
      }
      while (hi - lo > 1) {
        long long mid = lo + (hi - lo) / 2;
        (power_tail_raw(mid) > target ? lo : hi) = mid;
      }
      return hi;
    }
  }
  return 0;
}

Truncation LatticeMeasure::truncate(double eps_mass,
                                    std::size_t max_atoms) const {
  Truncation t;
  if (kind_ == Kind::finite) {
    t.atoms = atoms_;
    t.lost_mass = 0.0;
    return t;
  }
  long long k_max = support_cutoff(eps_mass);
  if (static_cast<std::size_t>(k_max) > max_atoms)
    throw std::length_error(
        "truncate: requested eps_mass needs more atoms than max_atoms");
  t.atoms.reserve(static_cast<std::size_t>(k_max));
  if (sign_ == Sign::positive) {
    for (long long k = 1; k <= k_max; ++k) t.atoms.push_back({k, mass(k)});
    t.lost_mass = upper_tail(k_max);
  } else {
    for (long long k = k_max; k >= 1; --k) t.atoms.push_back({-k, mass(-k)});
    t.lost_mass = lower_tail(k_max);
  }
  return t;
}

std::vector<long long> LatticeMeasure::support_in(long long lo, long long hi,
                                                  double eps_mass) const {
  std::vector<long long> out;
  if (lo > hi) return out;
  if (kind_ == Kind::finite) {
    for (const Atom& a : atoms_)
      if (a.site >= lo && a.site <= hi) out.push_back(a.site);
    return out;
  }
  long long k_max = support_cutoff(eps_mass);
  if (sign_ == Sign::positive) {
    for (long long k = std::max(1LL, lo); k <= std::min(hi, k_max); ++k)
      out.push_back(k);
  } else {
    for (long long k = std::max(lo, -k_max); k <= std::min(-1LL, hi); ++k)
      out.push_back(k);
  }
  return out;
}

double LatticeMeasure::upper_tail_sum_bound(long long n) const {
  // bound for sum_{m > n} upper_tail(m)
  if (n < 0) {
    double head = 0.0;
    for (long long m = n + 1; m <= 0; ++m) head += upper_tail(m);
    return head + upper_tail_sum_bound(0);
  }
  switch (kind_) {
    case Kind::finite: {
      double acc = 0.0;
      for (const Atom& a : atoms_)
        if (a.site > n + 1) acc += a.mass * double(a.site - 1 - n);
      return acc;
    }
    case Kind::geometric:
      if (sign_ == Sign::negative) return 0.0;
      return std::pow(param_, double(std::max(0LL, n + 1))) /
             (1.0 - param_);
    case Kind::power: {
      if (sign_ == Sign::negative) return 0.0;
      double s = param_;
      if (s <= 2.0) return kInf;
      // tail(m) <= m^{1-s}/(s-1), then sum_{m>=a} m^{1-s} <= a^{1-s} +
      // a^{2-s}/(s-2)
      double b = double(std::max(1LL, n + 1));
      return (std::pow(b, 1.0 - s) + std::pow(b, 2.0 - s) / (s - 2.0)) /
             ((s - 1.0) * norm_);
    }
  }
  return 0.0;
}

double LatticeMeasure::lower_tail_sum_bound(long long n) const {
  // bound for sum_{m > n} lower_tail(m); mirror of upper_tail_sum_bound
  if (n < 0) {
    double head = 0.0;
    for (long long m = n + 1; m <= 0; ++m) head += lower_tail(m);
    return head + lower_tail_sum_bound(0);
  }
  switch (kind_) {
    case Kind::finite: {
      double acc = 0.0;
      for (const Atom& a : atoms_)
        if (a.site < -(n + 1)) acc += a.mass * double(-a.site - 1 - n);
      return acc;
    }
    case Kind::geometric:
      if (sign_ == Sign::positive) return 0.0;
      return std::pow(param_, double(std::max(0LL, n + 1))) /
             (1.0 - param_);
    case Kind::power: {
      if (sign_ == Sign::positive) return 0.0;
      double s = param_;
      if (s <= 2.0) return kInf;
      double b = double(std::max(1LL, n + 1));
      return (std::pow(b, 1.0 - s) + std::pow(b, 2.0 - s) / (s - 2.0)) /
             ((s - 1.0) * norm_);
    }
  }
  return 0.0;
}

Potential potential(const LatticeMeasure& m, Sign side, long long t_max) {
  if (t_max < 0) throw std::invalid_argument("potential: t_max < 0");
  SupportSummary s = m.support_summary();
  if (s.sign_class == SignClass::mixed)
    throw std::domain_error(
        "potential: mixed-sign support; the renewal potential is one-sided");
  if ((side == Sign::positive) !=
      (s.sign_class == SignClass::strictly_positive))
    throw std::invalid_argument("potential: side does not match the support");
  Potential u;
  u.side = side;
  u.values.assign(static_cast<std::size_t>(t_max) + 1, 0.0);
  u.values[0] = 1.0;
  // U(t) = 1{t=0} + sum_k m(k) U(t-k); finitely many terms contribute.
  for (long long t = 1; t <= t_max; ++t) {
    double acc = 0.0;
    if (m.is_finite()) {
      for (const Atom& a : m.atoms()) {
        long long k = side == Sign::positive ? a.site : -a.site;
        if (k >= 1 && k <= t)
          acc += a.mass * u.values[static_cast<std::size_t>(t - k)];
      }
    } else {
      for (long long k = 1; k <= t; ++k) {
        long long site = side == Sign::positive ? k : -k;
        acc += m.mass(site) * u.values[static_cast<std::size_t>(t - k)];
      }
    }
    u.values[static_cast<std::size_t>(t)] = acc;
  }
  return u;
}

ZMeasure convolve(const Truncation& a, const Truncation& b, Window window) {
  ZMeasure out = ZMeasure::zeros(window);
  double spill = 0.0;
  for (const Atom& x : a.atoms)
    for (const Atom& y : b.atoms) {
      long long site = x.site + y.site;
      double v = x.mass * y.mass;
      if (window.contains(site))
        out.values[static_cast<std::size_t>(site - window.lo)] += v;
      else
        spill += v;
    }
  out.tail_bound = a.lost_mass + b.lost_mass + spill;
  return out;
}

ZMeasure convolve(const ZMeasure& a, const Truncation& b, Window window) {
  ZMeasure out = ZMeasure::zeros(window);
  double spill = 0.0;
  for (long long i = 0; i < a.window.size(); ++i) {
    double va = a.values[static_cast<std::size_t>(i)];
    if (va == 0.0) continue;
    long long sa = a.window.lo + i;
    for (const Atom& y : b.atoms) {
      long long site = sa + y.site;
      double v = va * y.mass;
      if (window.contains(site))
        out.values[static_cast<std::size_t>(site - window.lo)] += v;
      else
        spill += v;
    }
  }
  out.tail_bound = a.tail_bound + b.lost_mass * a.sum() + spill;
  return out;
}

}  // namespace oscwalk
