#include "oscwalk/classes.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace oscwalk {

namespace {

// Sorted distinct |site| values of the support on one side, 0 prepended,
// as used by the gap criteria.
std::vector<long long> ladder_sites(const LatticeMeasure& m, bool positive) {
  std::vector<long long> v{0};
  if (m.is_finite()) {
    for (const Atom& a : m.atoms()) {
      if (positive && a.site > 0) v.push_back(a.site);
      if (!positive && a.site < 0) v.push_back(-a.site);
    }
    std::sort(v.begin(), v.end());
  }
  // parametric supports are a full half line; gaps are all 1 and never
  // trigger the gap criterion, so {0} suffices as a marker
  return v;
}

}  // namespace

bool ExcludedBand::contains(long long x) const {
  if (band_hi < band_lo) return false;
  if (upward) {
    if (x < band_lo) return false;
    return floor_mod(x - band_lo, step) <= band_hi - band_lo;
  }
  if (x > band_hi) return false;
  return floor_mod(band_hi - x, step) <= band_hi - band_lo;
}

bool ClassDescriptor::contains(long long x) const {
  if (floor_mod(x, delta) != residue) return false;
  if (lower && x < *lower) return false;
  if (upper && x > *upper) return false;
  if (std::binary_search(excluded.begin(), excluded.end(), x)) return false;
  if (excluded_band && excluded_band->contains(x)) return false;
  return true;
}

std::vector<long long> ClassDescriptor::enumerate(Window w) const {
  std::vector<long long> out;
  for (long long x = w.lo; x <= w.hi; ++x)
    if (contains(x)) out.push_back(x);
  return out;
}

bool ClassDecomposition::is_transient(long long x) const {
  return !classes[static_cast<std::size_t>(residue_of(x))].contains(x);
}

TransientOrbit ClassDecomposition::transient_orbit(long long x) const {
  if (!is_transient(x))
    throw std::logic_error("transient_orbit: state is essential");
  TransientOrbit o;
  o.anchor = x;
  if (!transient_band) return o;  // one-sided theorem: singleton
  o.step = transient_step;
  o.upward = transient_band->upward;
  // upward case: orbit is (x + step Z) above the band floor; mirrored below
  o.bound = o.upward ? transient_band->band_lo : transient_band->band_hi;
  return o;
}

ClassDecomposition essential_classes_onesided(const LatticeMeasure& mu,
                                              const LatticeMeasure& mu_prime) {
  SupportSummary sp = mu.support_summary();
  SupportSummary sm = mu_prime.support_summary();
  if (sp.sign_class != SignClass::strictly_positive ||
      sm.sign_class != SignClass::strictly_negative)
    throw std::domain_error(
        "essential_classes_onesided: needs mu on Z+ and mu' on Z-; "
        "two-sided supports go through the general routine");
  ClassDecomposition d;
  d.delta = std::gcd(sp.gcd, sm.gcd);
  for (long long r = 0; r < d.delta; ++r) {
    ClassDescriptor c;
    c.residue = r;
    c.delta = d.delta;
    c.lower = sm.min_site;  // D', nullopt when the tail is unbounded below
    if (sp.max_site) c.upper = *sp.max_site - 1;  // D - 1
    d.classes.push_back(std::move(c));
  }
  return d;
}

ClassDecomposition essential_classes_general(const LatticeMeasure& mu,
                                             const LatticeMeasure& mu_prime) {
  SupportSummary sp = mu.support_summary();
  SupportSummary sm = mu_prime.support_summary();
  if (sp.sign_class != SignClass::mixed || sm.sign_class != SignClass::mixed)
    throw NotCoveredError(
        "general decomposition needs all four sign parts nonempty");
  long long d_mu = sp.gcd, d_mup = sm.gcd;
  if (d_mu == d_mup)
    throw NotCoveredError("general decomposition needs d != d'");
  ClassDecomposition d;
  d.delta = std::gcd(d_mu, d_mup);
  long long D = *sp.max_site;       // two-sided supports are finite here
  long long Dp = *sm.min_site;
  std::optional<ExcludedBand> band;
  long long step = 0;
  if (D < d_mup) {
    band = ExcludedBand{D, d_mup - 1, d_mup, true};
    step = d_mup;
  } else if (Dp > -d_mu) {
    band = ExcludedBand{-d_mu, Dp - 1, d_mu, false};
    step = d_mu;
  }
  for (long long r = 0; r < d.delta; ++r) {
    ClassDescriptor c;
    c.residue = r;
    c.delta = d.delta;
    c.excluded_band = band;
    d.classes.push_back(std::move(c));
  }
  d.transient_band = band;
  d.transient_step = step;
  return d;
}

DecompositionOutcome decompose(const LatticeMeasure& mu,
                               const LatticeMeasure& mu_prime) {
  DecompositionOutcome out;
  SupportSummary sp = mu.support_summary();
  SupportSummary sm = mu_prime.support_summary();
  if (sp.sign_class == SignClass::strictly_positive &&
      sm.sign_class == SignClass::strictly_negative) {
    out.covered = true;
    out.route = "one-sided";
    out.decomposition = essential_classes_onesided(mu, mu_prime);
    return out;
  }
  try {
    out.decomposition = essential_classes_general(mu, mu_prime);
    out.covered = true;
    out.route = "general";
  } catch (const NotCoveredError& e) {
    out.covered = false;
    out.route = "oracle";
    out.not_covered_reason = e.what();
  }
  return out;
}

bool SetDescriptor::contains(long long x) const {
  if (floor_mod(x, delta) != residue) return false;
  if (lower && x < *lower) return false;
  if (upper && x > *upper) return false;
  return !std::binary_search(excluded.begin(), excluded.end(), x);
}

std::vector<long long> SetDescriptor::enumerate(Window w) const {
  std::vector<long long> out;
  for (long long x = w.lo; x <= w.hi; ++x)
    if (contains(x)) out.push_back(x);
  return out;
}

bool CrossingClass::contains(long long x) const {
  return x >= 0 ? plus_side.contains(x) : minus_side.contains(x);
}

CrossingClass crossing_class(const ClassDecomposition& decomposition,
                             long long r, const LatticeMeasure& mu,
                             const LatticeMeasure& mu_prime) {
  if (r < 0 || r >= decomposition.delta)
    throw std::invalid_argument("crossing_class: residue out of range");
  SupportSummary sp = mu.support_summary();
  SupportSummary sm = mu_prime.support_summary();
  if (sp.sign_class != SignClass::strictly_positive ||
      sm.sign_class != SignClass::strictly_negative)
    throw std::domain_error(
        "crossing_class: crossing classes are defined for one-sided jump "
        "laws");
  long long delta = decomposition.delta;
  CrossingClass cc;
  cc.residue = r;
  cc.delta = delta;

  cc.plus_side.residue = r;
  cc.plus_side.delta = delta;
  cc.plus_side.lower = r;  // smallest nonnegative member
  if (sp.max_site) cc.plus_side.upper = *sp.max_site - 1;

  cc.minus_side.residue = r;
  cc.minus_side.delta = delta;
  cc.minus_side.upper = r - delta;  // largest negative member
  cc.minus_side.lower = sm.min_site;

  std::vector<long long> noncrossing_plus, noncrossing_minus;

  // Plus side: I_C^+(r) = I^+(r) unless some gap of S_mu exceeds -D'.
  if (sm.min_site) {
    long long bound = -*sm.min_site;  // -D'
    std::vector<long long> a = ladder_sites(mu, true);
    for (std::size_t k = 1; k < a.size(); ++k) {
      long long gap = a[k] - a[k - 1];
      if (gap <= bound) continue;
      long long count = (gap - bound) / delta;
      for (long long s = 0; s < count; ++s)
        noncrossing_plus.push_back(a[k - 1] + r + delta * s);
    }
  }

  // Minus side: I_C^-(r) = I^-(r) unless some gap of |S_mu'| exceeds D.
  if (sp.max_site) {
    long long D = *sp.max_site;
    std::vector<long long> b = ladder_sites(mu_prime, false);
    for (std::size_t l = 1; l < b.size(); ++l) {
      long long gap = b[l] - b[l - 1];
      if (gap <= D) continue;
      // s runs over [(b_{l-1} - b_l + D)/delta, -1]
      for (long long s = (D - gap) / delta; s <= -1; ++s)
        noncrossing_minus.push_back(-b[l - 1] + r + delta * s);
    }
  }

  std::sort(noncrossing_plus.begin(), noncrossing_plus.end());
  std::sort(noncrossing_minus.begin(), noncrossing_minus.end());
  cc.plus_side.excluded = noncrossing_plus;
  cc.minus_side.excluded = noncrossing_minus;
  cc.noncrossing = noncrossing_minus;
  cc.noncrossing.insert(cc.noncrossing.end(), noncrossing_plus.begin(),
                        noncrossing_plus.end());
  return cc;
}

bool OracleResult::interior(long long x, long long extra_margin) const {
  long long m = margin * (1 + extra_margin);
  return x >= window.lo + m && x <= window.hi - m;
}

int OracleResult::scc_of(long long x) const {
  if (!window.contains(x)) throw std::out_of_range("scc_of: outside window");
  return scc_id[static_cast<std::size_t>(x - window.lo)];
}

bool OracleResult::essential_member(long long x) const {
  return scc_essential[static_cast<std::size_t>(scc_of(x))] != 0;
}

OracleResult reachability_oracle(const LatticeMeasure& mu,
                                 const LatticeMeasure& mu_prime, double alpha,
                                 Window window, long long max_hops,
                                 double eps_mass) {
  if (window.empty())
    throw std::invalid_argument("reachability_oracle: empty window");
  if (window.size() > 2000000)
    throw std::invalid_argument("reachability_oracle: window too large");
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("reachability_oracle: alpha outside [0,1]");
  long long n = window.size();

  auto jump_range = [&](const LatticeMeasure& m) {
    SupportSummary s = m.support_summary();
    long long cutoff = m.support_cutoff(eps_mass);
    long long lo = s.min_site ? *s.min_site : -cutoff;
    long long hi = s.max_site ? *s.max_site : cutoff;
    return std::pair<long long, long long>{lo, hi};
  };
  auto [mu_lo, mu_hi] = jump_range(mu);
  auto [mup_lo, mup_hi] = jump_range(mu_prime);

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  std::vector<char> reliable(static_cast<std::size_t>(n), 1);
  long long hops = 0;
  for (long long i = 0; i < n; ++i) {
    long long x = window.lo + i;
    const LatticeMeasure* active[2] = {nullptr, nullptr};
    if (x <= -1) {
      active[0] = &mu;
    } else if (x >= 1) {
      active[0] = &mu_prime;
    } else {
      if (alpha == 0.0)
        active[0] = &mu_prime;
      else if (alpha == 1.0)
        active[0] = &mu;
      else {
        active[0] = &mu;
        active[1] = &mu_prime;
      }
    }
    for (const LatticeMeasure* m : active) {
      if (!m) continue;
      auto [jlo, jhi] = m == &mu ? std::pair{mu_lo, mu_hi}
                                 : std::pair{mup_lo, mup_hi};
      if (x + jhi > window.hi || x + jlo < window.lo)
        reliable[static_cast<std::size_t>(i)] = 0;
      for (long long s :
           m->support_in(window.lo - x, window.hi - x, eps_mass)) {
        adj[static_cast<std::size_t>(i)].push_back(
            static_cast<int>(x + s - window.lo));
        if (++hops > max_hops)
          throw std::runtime_error("reachability_oracle: hop budget exceeded");
      }
    }
  }

  // Tarjan SCC, iterative. Completion order gives reverse topological
  // order of the condensation.
  OracleResult res;
  res.window = window;
  res.margin = std::max({mu_hi, -mu_lo, mup_hi, -mup_lo, 0LL});
  res.scc_id.assign(static_cast<std::size_t>(n), -1);
  res.reliable = reliable;

  std::vector<int> index(static_cast<std::size_t>(n), -1);
  std::vector<int> lowlink(static_cast<std::size_t>(n), 0);
  std::vector<char> onstack(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  int next_index = 0, next_scc = 0;
  struct Frame {
    int v;
    std::size_t child;
  };
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    index[static_cast<std::size_t>(root)] =
        lowlink[static_cast<std::size_t>(root)] = next_index++;
    stack.push_back(root);
    onstack[static_cast<std::size_t>(root)] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      auto vi = static_cast<std::size_t>(f.v);
      if (f.child < adj[vi].size()) {
        int w = adj[vi][f.child++];
        auto wi = static_cast<std::size_t>(w);
        if (index[wi] == -1) {
          index[wi] = lowlink[wi] = next_index++;
          stack.push_back(w);
          onstack[wi] = 1;
          call.push_back({w, 0});
        } else if (onstack[wi]) {
          lowlink[vi] = std::min(lowlink[vi], index[wi]);
        }
        continue;
      }
      if (lowlink[vi] == index[vi]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          onstack[static_cast<std::size_t>(w)] = 0;
          res.scc_id[static_cast<std::size_t>(w)] = next_scc;
        } while (w != f.v);
        ++next_scc;
      }
      call.pop_back();
      if (!call.empty()) {
        auto pi = static_cast<std::size_t>(call.back().v);
        lowlink[pi] = std::min(lowlink[pi], lowlink[vi]);
      }
    }
  }
  res.n_scc = next_scc;

  // A sink component is declared essential. Boundary truncation can fake a
  // sink (a member's real escape edge was dropped), which is why assertions
  // are restricted to interior states and unreliable members stay flagged.
  std::vector<char> has_out(static_cast<std::size_t>(next_scc), 0);
  for (long long i = 0; i < n; ++i) {
    int c = res.scc_id[static_cast<std::size_t>(i)];
    for (int w : adj[static_cast<std::size_t>(i)])
      if (res.scc_id[static_cast<std::size_t>(w)] != c)
        has_out[static_cast<std::size_t>(c)] = 1;
  }
  res.scc_essential.assign(static_cast<std::size_t>(next_scc), 0);
  for (int c = 0; c < next_scc; ++c)
    res.scc_essential[static_cast<std::size_t>(c)] =
        !has_out[static_cast<std::size_t>(c)];

  // Unique reachable essential SCC per SCC; edges go from higher to lower
  // completion ids, so a forward pass over ascending ids is a reverse
  // topological sweep.
  constexpr int kNone = -1, kMany = -2;
  std::vector<int> reach(static_cast<std::size_t>(next_scc), kNone);
  for (int c = 0; c < next_scc; ++c)
    if (res.scc_essential[static_cast<std::size_t>(c)])
      reach[static_cast<std::size_t>(c)] = c;
  auto merge = [](int a, int b) {
    if (a == kNone) return b;
    if (b == kNone) return a;
    return a == b ? a : kMany;
  };
  std::vector<std::vector<int>> scc_edges(static_cast<std::size_t>(next_scc));
  for (long long i = 0; i < n; ++i)
    for (int w : adj[static_cast<std::size_t>(i)]) {
      int a = res.scc_id[static_cast<std::size_t>(i)];
      int b = res.scc_id[static_cast<std::size_t>(w)];
      if (a != b) scc_edges[static_cast<std::size_t>(a)].push_back(b);
    }
  for (int c = 0; c < next_scc; ++c)
    for (int b : scc_edges[static_cast<std::size_t>(c)])
      reach[static_cast<std::size_t>(c)] =
          merge(reach[static_cast<std::size_t>(c)],
                reach[static_cast<std::size_t>(b)]);

  res.absorbed_scc.assign(static_cast<std::size_t>(n), -1);
  for (long long i = 0; i < n; ++i) {
    int r = reach[static_cast<std::size_t>(
        res.scc_id[static_cast<std::size_t>(i)])];
    res.absorbed_scc[static_cast<std::size_t>(i)] = r >= 0 ? r : -1;
  }
  return res;
}

std::string compare_with_oracle(const ClassDecomposition& d,
                                const OracleResult& o,
                                long long extra_margin) {
  std::map<long long, int> class_scc;   // residue -> essential scc
  std::map<int, long long> scc_class;
  auto diag = [](long long x, const std::string& what) {
    return "state " + std::to_string(x) + ": " + what;
  };
  for (long long x = o.window.lo; x <= o.window.hi; ++x) {
    if (!o.interior(x, extra_margin)) continue;
    bool ess = o.essential_member(x);
    if (ess == d.is_transient(x))
      return diag(x, ess ? "oracle essential, analytic transient"
                         : "oracle transient, analytic essential");
    if (!ess) continue;
    long long r = d.residue_of(x);
    int c = o.scc_of(x);
    auto [it, inserted] = class_scc.try_emplace(r, c);
    if (!inserted && it->second != c)
      return diag(x, "residue split across oracle classes");
    auto [jt, jnew] = scc_class.try_emplace(c, r);
    if (!jnew && jt->second != r)
      return diag(x, "oracle class mixes residues");
  }
  for (long long r = 0; r < d.delta; ++r)
    if (!class_scc.count(r))
      return "no interior member of residue " + std::to_string(r) +
             " was certified essential; widen the window";
  for (long long x = o.window.lo; x <= o.window.hi; ++x) {
    if (!o.interior(x, extra_margin) || !d.is_transient(x)) continue;
    int got = o.absorbed_scc[static_cast<std::size_t>(x - o.window.lo)];
    if (got == -1) return diag(x, "oracle absorption undetermined");
    if (got != class_scc[d.absorbed_residue(x)])
      return diag(x, "absorbed into unexpected class");
  }
  return "";
}

}  // namespace oscwalk
