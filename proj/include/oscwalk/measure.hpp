#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace oscwalk {

// Inclusive integer interval [lo, hi]. hi < lo means empty.
struct Window {
  long long lo = 0;
  long long hi = -1;

  bool empty() const { return hi < lo; }
  long long size() const { return empty() ? 0 : hi - lo + 1; }
  bool contains(long long x) const { return x >= lo && x <= hi; }
};

// Mathematical modulus: result in [0, m) for m > 0.
inline long long floor_mod(long long x, long long m) {
  long long r = x % m;
  return r < 0 ? r + m : r;
}

enum class Sign { positive, negative };
enum class SignClass { strictly_positive, strictly_negative, mixed };

struct Atom {
  long long site = 0;
  double mass = 0.0;
};

struct SupportSummary {
  std::optional<long long> max_site;  // nullopt: unbounded above
  std::optional<long long> min_site;  // nullopt: unbounded below
  long long gcd = 1;                  // gcd of |site| over the support
  SignClass sign_class = SignClass::mixed;
};

struct Truncation {
  std::vector<Atom> atoms;  // sorted by site
  double lost_mass = 0.0;   // exact discarded mass
};

// Renewal potential of a one-sided step law, U(t) = sum_n m^{*n}(t).
// For side == negative, values[t] stands for U'(-t).
struct Potential {
  Sign side = Sign::positive;
  std::vector<double> values;  // index 0..t_max

  long long t_max() const { return static_cast<long long>(values.size()) - 1; }
  // t is the lattice argument: t >= 0 for positive side, t <= 0 for negative.
  double at(long long t) const;
};

// Nonnegative measure known on a finite window; tail_bound bounds the mass
// (or, for derived quantities, the entrywise defect) lying outside it.
struct ZMeasure {
  Window window;
  std::vector<double> values;
  double tail_bound = 0.0;

  static ZMeasure zeros(Window w);
  double at(long long site) const;
  void add(long long site, double v);  // ignores out-of-window sites
  void set(long long site, double v);
  double sum() const;
};

// Probability measure on Z \ {0}: explicit finite atoms, or a one-sided
// geometric tail (mass (1-r) r^{k-1} at +-k), or a one-sided power tail
// (mass k^{-s} / Z(s) at +-k).
class LatticeMeasure {
 public:
  enum class Kind { finite, geometric, power };

  static constexpr std::size_t kDefaultMaxAtoms = std::size_t{1} << 23;

  static LatticeMeasure finite_atoms(std::vector<Atom> atoms);
  static LatticeMeasure geometric(Sign sign, double ratio);
  static LatticeMeasure power(Sign sign, double exponent);

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::finite; }
  Sign tail_sign() const;     // parametric variants only
  double ratio() const;       // geometric only
  double exponent() const;    // power only
  const std::vector<Atom>& atoms() const;  // finite only

  double mass(long long site) const;
  // H(n) = mass of ]n, +inf[ and H'(-n) = mass of ]-inf, -n[; any n accepted.
  double upper_tail(long long n) const;
  double lower_tail(long long n) const;
  // mass of [lo, hi]; zero when lo > hi.
  double interval_mass(long long lo, long long hi) const;

  SupportSummary support_summary() const;
  bool strictly_positive() const;
  bool strictly_negative() const;

  // E|X|^p, +inf when divergent; one_sided_moment restricts to one sign.
  double moment(double p) const;
  double one_sided_moment(double p, Sign side) const;
  // E[X^+] and E[X^-] = E[max(-X,0)] as a pair (either may be +inf).
  double mean_positive_part() const;
  double mean_negative_part() const;

  // Smallest cutoff K such that the discarded one-sided tail beyond |K| has
  // mass <= eps; finite variant returns max |site|.
  long long support_cutoff(double eps_mass) const;
  Truncation truncate(double eps_mass,
                      std::size_t max_atoms = kDefaultMaxAtoms) const;
  // Support sites inside [lo, hi], treating the eps-truncated support of
  // parametric variants as exact.
  std::vector<long long> support_in(long long lo, long long hi,
                                    double eps_mass) const;
  // Upper bound for sum_{n > N} upper_tail(n) (resp. lower_tail), +inf when
  // the series diverges. Used for window tail accounting.
  double upper_tail_sum_bound(long long n) const;
  double lower_tail_sum_bound(long long n) const;

 private:
  LatticeMeasure() = default;

  Kind kind_ = Kind::finite;
  Sign sign_ = Sign::positive;
  double param_ = 0.0;             // ratio or exponent
  std::vector<Atom> atoms_;        // finite variant, sorted by site
  // power-tail internals: prefix_[k] = sum_{j<=k} j^{-s}, norm_ = Z(s)
  std::vector<double> prefix_;
  double norm_ = 1.0;

  double power_tail_raw(long long n) const;  // sum_{k>n} k^{-s}
};

// Renewal potential U(0..t_max); side selects which sign the support of m
// must have. Throws on mixed-sign support.
Potential potential(const LatticeMeasure& m, Sign side, long long t_max);

// Truncated convolutions; mass landing outside the window is added to the
// result's tail_bound together with the inputs' recorded losses.
ZMeasure convolve(const Truncation& a, const Truncation& b, Window window);
ZMeasure convolve(const ZMeasure& a, const Truncation& b, Window window);

}  // namespace oscwalk
