#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "oscwalk/classes.hpp"
#include "oscwalk/measure.hpp"

using namespace oscwalk;

namespace {

LatticeMeasure uniform_on(const std::vector<long long>& sites) {
  std::vector<Atom> atoms;
  double w = 1.0 / static_cast<double>(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    double m = i + 1 == sites.size()
                   ? 1.0 - w * static_cast<double>(sites.size() - 1)
                   : w;
    atoms.push_back({sites[i], m});
  }
  return LatticeMeasure::finite_atoms(atoms);
}

std::vector<long long> members(const CrossingClass& cc, Window w) {
  std::vector<long long> out;
  for (long long x = w.lo; x <= w.hi; ++x)
    if (cc.contains(x)) out.push_back(x);
  return out;
}

// Random strictly one-sided supports with small sites.
std::pair<LatticeMeasure, LatticeMeasure> random_onesided(std::mt19937& gen) {
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_int_distribution<long long> site(1, 10);
  auto pick = [&](long long sgn) {
    std::set<long long> s;
    int n = count(gen);
    while (static_cast<int>(s.size()) < n) s.insert(sgn * site(gen));
    return std::vector<long long>(s.begin(), s.end());
  };
  return {uniform_on(pick(1)), uniform_on(pick(-1))};
}

}  // namespace

TEST_CASE("worked ladder example") {
  LatticeMeasure mu = uniform_on({2, 4, 10});
  LatticeMeasure mup = uniform_on({-4, -1});
  ClassDecomposition dec = essential_classes_onesided(mu, mup);
  CHECK(dec.delta == 1);
  REQUIRE(dec.classes.size() == 1);
  CHECK(*dec.classes[0].lower == -4);
  CHECK(*dec.classes[0].upper == 9);
  CHECK(dec.classes[0].excluded.empty());
  CHECK(dec.is_transient(10));
  CHECK(dec.is_transient(-5));
  CHECK_FALSE(dec.is_transient(0));
  CHECK(dec.absorbed_residue(25) == 0);

  CrossingClass cc = crossing_class(dec, 0, mu, mup);
  CHECK(cc.noncrossing == std::vector<long long>{4, 5});
  CHECK(members(cc, {-10, 15}) ==
        std::vector<long long>{-4, -3, -2, -1, 0, 1, 2, 3, 6, 7, 8, 9});
  CHECK_FALSE(cc.contains(4));
  CHECK_FALSE(cc.contains(5));
  // minus side complete: all mu gaps <= -D' = 4
  CHECK(*cc.minus_side.lower == -4);
  CHECK(*cc.minus_side.upper == -1);
  CHECK(cc.minus_side.excluded.empty());
}

TEST_CASE("ladder example variant with gaps closed") {
  LatticeMeasure mu = uniform_on({2, 6, 10});
  LatticeMeasure mup = uniform_on({-4, -1});
  ClassDecomposition dec = essential_classes_onesided(mu, mup);
  CrossingClass cc = crossing_class(dec, 0, mu, mup);
  CHECK(cc.noncrossing.empty());
  CHECK(members(cc, {-10, 15}) ==
        std::vector<long long>{-4, -3, -2, -1, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("two state alternation") {
  LatticeMeasure mu = uniform_on({1});
  LatticeMeasure mup = uniform_on({-1});
  ClassDecomposition dec = essential_classes_onesided(mu, mup);
  CHECK(dec.delta == 1);
  CHECK(*dec.classes[0].lower == -1);
  CHECK(*dec.classes[0].upper == 0);
}

TEST_CASE("period two decomposition and absorption") {
  LatticeMeasure mu = uniform_on({2});
  LatticeMeasure mup = uniform_on({-2});
  ClassDecomposition dec = essential_classes_onesided(mu, mup);
  CHECK(dec.delta == 2);
  CHECK(dec.classes[0].enumerate({-6, 6}) == std::vector<long long>{-2, 0});
  CHECK(dec.classes[1].enumerate({-6, 6}) == std::vector<long long>{-1, 1});
  CHECK(dec.is_transient(5));
  CHECK(dec.absorbed_residue(5) == 1);
  // one-sided transient motion is strictly one-way: singleton classes
  TransientOrbit orbit = dec.transient_orbit(5);
  CHECK(orbit.anchor == 5);
  CHECK(orbit.step == 0);
}

TEST_CASE("unbounded supports have complete crossing classes") {
  LatticeMeasure mu = LatticeMeasure::geometric(Sign::positive, 0.5);
  LatticeMeasure mup = LatticeMeasure::geometric(Sign::negative, 0.4);
  ClassDecomposition dec = essential_classes_onesided(mu, mup);
  CHECK(dec.delta == 1);
  CHECK_FALSE(dec.classes[0].lower.has_value());
  CHECK_FALSE(dec.classes[0].upper.has_value());
  CrossingClass cc = crossing_class(dec, 0, mu, mup);
  CHECK(cc.noncrossing.empty());
  CHECK(cc.contains(1234));
  CHECK(cc.contains(-777));
}

TEST_CASE("one sided route rejects mixed signs") {
  LatticeMeasure mixed = uniform_on({-1, 2});
  LatticeMeasure mup = uniform_on({-1});
  CHECK_THROWS_AS(essential_classes_onesided(mixed, mup), std::domain_error);
}

TEST_CASE("general route full lattice classes") {
  // d = 2, d' = 3, delta = 1, D >= d' and D' <= -d
  LatticeMeasure mu = uniform_on({-2, 2, 4});
  LatticeMeasure mup = uniform_on({-3, 3});
  ClassDecomposition dec = essential_classes_general(mu, mup);
  CHECK(dec.delta == 1);
  CHECK_FALSE(dec.classes[0].lower.has_value());
  CHECK_FALSE(dec.classes[0].upper.has_value());
  CHECK_FALSE(dec.transient_band.has_value());
  CHECK_FALSE(dec.is_transient(17));
}

TEST_CASE("general route upward transient band") {
  // D = 1 < d' = 6: band {1..5} repeated upward with step 6
  LatticeMeasure mu = uniform_on({-1, 1});
  LatticeMeasure mup = uniform_on({-6, 6});
  ClassDecomposition dec = essential_classes_general(mu, mup);
  CHECK(dec.delta == 1);
  CHECK(dec.is_transient(3));
  CHECK(dec.is_transient(9));
  CHECK(dec.is_transient(40));
  CHECK_FALSE(dec.is_transient(0));
  CHECK_FALSE(dec.is_transient(6));
  CHECK_FALSE(dec.is_transient(-3));
  TransientOrbit orbit = dec.transient_orbit(9);
  CHECK(orbit.step == 6);
  CHECK(orbit.upward);
  CHECK(*orbit.bound == 1);  // orbit lives in (9 + 6Z) above the band floor
  OracleResult o = reachability_oracle(mu, mup, 0.0, {-60, 60});
  CHECK(compare_with_oracle(dec, o, 1) == "");
}

TEST_CASE("general route downward transient band") {
  // mirror case: D' = -1 > -d = -6, band {-6..-2} repeated downward.
  // The band is not the reflection of the upward one: state 0 belongs to
  // the nonnegative side, so -1 stays essential while -6 does not.
  LatticeMeasure mu = uniform_on({-6, 6});
  LatticeMeasure mup = uniform_on({-1, 1});
  ClassDecomposition dec = essential_classes_general(mu, mup);
  CHECK(dec.is_transient(-3));
  CHECK(dec.is_transient(-6));
  CHECK(dec.is_transient(-9));
  CHECK(dec.is_transient(-48));
  CHECK_FALSE(dec.is_transient(-1));
  CHECK_FALSE(dec.is_transient(-7));
  CHECK_FALSE(dec.is_transient(0));
  CHECK_FALSE(dec.is_transient(3));
  TransientOrbit orbit = dec.transient_orbit(-9);
  CHECK(orbit.step == 6);
  CHECK_FALSE(orbit.upward);
  CHECK(*orbit.bound == -2);
  OracleResult o = reachability_oracle(mu, mup, 0.0, {-60, 60});
  CHECK(compare_with_oracle(dec, o, 1) == "");
}

TEST_CASE("general route refuses d equal d_prime") {
  LatticeMeasure mu = uniform_on({-2, 2});
  LatticeMeasure mup = uniform_on({-2, 2});
  CHECK_THROWS_AS(essential_classes_general(mu, mup), NotCoveredError);
  DecompositionOutcome out = decompose(mu, mup);
  CHECK_FALSE(out.covered);
  CHECK(out.route == "oracle");
}

TEST_CASE("decompose picks a route") {
  DecompositionOutcome a = decompose(uniform_on({2}), uniform_on({-2}));
  CHECK(a.covered);
  CHECK(a.route == "one-sided");
  DecompositionOutcome b = decompose(uniform_on({-2, 2}), uniform_on({-3, 3}));
  CHECK(b.covered);
  CHECK(b.route == "general");
}

TEST_CASE("oracle matches analytic decomposition on random one sided pairs") {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 40; ++trial) {
    auto [mu, mup] = random_onesided(gen);
    ClassDecomposition dec = essential_classes_onesided(mu, mup);
    OracleResult oracle = reachability_oracle(mu, mup, 0.0, {-60, 60});
    CAPTURE(trial);
    CHECK(compare_with_oracle(dec, oracle, 1) == "");
  }
}

TEST_CASE("oracle matches analytic decomposition on random two sided pairs") {
  std::mt19937 gen(11);
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_int_distribution<long long> site(1, 8);
  auto pick_mixed = [&]() {
    std::set<long long> s;
    int np = count(gen), nn = count(gen);
    while (static_cast<int>(s.size()) < np) s.insert(site(gen));
    while (static_cast<int>(s.size()) < np + nn) s.insert(-site(gen));
    return uniform_on({s.begin(), s.end()});
  };
  int done = 0;
  while (done < 40) {
    LatticeMeasure mu = pick_mixed();
    LatticeMeasure mup = pick_mixed();
    DecompositionOutcome out = decompose(mu, mup);
    if (!out.covered) continue;  // d = d' pairs are oracle-only
    OracleResult oracle = reachability_oracle(mu, mup, 0.0, {-60, 60});
    CAPTURE(done);
    CHECK(compare_with_oracle(*out.decomposition, oracle, 1) == "");
    ++done;
  }
}

TEST_CASE("crossing classes partition the essential class") {
  std::mt19937 gen(23);
  for (int trial = 0; trial < 60; ++trial) {
    auto [mu, mup] = random_onesided(gen);
    ClassDecomposition dec = essential_classes_onesided(mu, mup);
    for (long long r = 0; r < dec.delta; ++r) {
      CrossingClass cc = crossing_class(dec, r, mu, mup);
      std::set<long long> nc(cc.noncrossing.begin(), cc.noncrossing.end());
      std::vector<long long> class_members =
          dec.classes[static_cast<std::size_t>(r)].enumerate({-40, 40});
      for (long long x : class_members) {
        bool in_cc = cc.contains(x);
        bool in_nc = nc.count(x) > 0;
        CAPTURE(trial);
        CAPTURE(x);
        CHECK(in_cc != in_nc);  // disjoint and covering
      }
      for (long long x : nc) {
        CHECK(dec.classes[static_cast<std::size_t>(r)].contains(x));
      }
    }
  }
}

TEST_CASE("at most one crossing side is strict") {
  std::mt19937 gen(31);
  for (int trial = 0; trial < 60; ++trial) {
    auto [mu, mup] = random_onesided(gen);
    ClassDecomposition dec = essential_classes_onesided(mu, mup);
    for (long long r = 0; r < dec.delta; ++r) {
      CrossingClass cc = crossing_class(dec, r, mu, mup);
      bool plus_strict = false, minus_strict = false;
      for (long long x : cc.noncrossing) {
        if (x >= 0) plus_strict = true;
        if (x <= -1) minus_strict = true;
      }
      CAPTURE(trial);
      bool both_strict = plus_strict && minus_strict;
      CHECK_FALSE(both_strict);
    }
  }
}

TEST_CASE("adding a mu atom never shrinks the minus crossing side") {
  std::mt19937 gen(47);
  std::uniform_int_distribution<long long> site(1, 12);
  for (int trial = 0; trial < 50; ++trial) {
    auto [mu, mup] = random_onesided(gen);
    long long extra = site(gen);
    std::vector<Atom> atoms = mu.atoms();
    bool present = false;
    for (const Atom& a : atoms) present = present || a.site == extra;
    if (present) continue;
    for (Atom& a : atoms) a.mass *= 0.5;
    atoms.push_back({extra, 0.5});
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.site < b.site; });
    LatticeMeasure mu_big = LatticeMeasure::finite_atoms(atoms);

    ClassDecomposition dec = essential_classes_onesided(mu, mup);
    ClassDecomposition dec_big = essential_classes_onesided(mu_big, mup);
    for (long long r = 0; r < dec.delta; ++r) {
      CrossingClass small = crossing_class(dec, r, mu, mup);
      // residues may refine differently; compare through absolute sites
      for (long long x = -30; x <= -1; ++x) {
        if (!small.contains(x)) continue;
        long long rb = dec_big.residue_of(x);
        if (dec_big.is_transient(x)) continue;  // class window moved
        CrossingClass big = crossing_class(dec_big, rb, mu_big, mup);
        CAPTURE(trial);
        CAPTURE(x);
        CHECK(big.contains(x));
      }
    }
  }
}

TEST_CASE("oracle flags transient absorption on the worked example") {
  LatticeMeasure mu = uniform_on({2, 4, 10});
  LatticeMeasure mup = uniform_on({-4, -1});
  OracleResult o = reachability_oracle(mu, mup, 0.0, {-30, 30});
  CHECK(o.essential_member(0));
  CHECK(o.essential_member(-4));
  CHECK(o.essential_member(9));
  CHECK_FALSE(o.essential_member(10));
  CHECK_FALSE(o.essential_member(-5));
  // all transient interior states funnel into the single class
  int class_scc = o.scc_of(0);
  for (long long x = -12; x <= 20; ++x) {
    if (o.essential_member(x)) continue;
    CHECK(o.absorbed_scc[static_cast<std::size_t>(x - o.window.lo)] ==
          class_scc);
  }
}

TEST_CASE("oracle respects alpha convention at zero") {
  // mu = {+2}, mu' = {-1}: at alpha=0 state 0 steps by mu', at alpha=1 by mu
  LatticeMeasure mu = uniform_on({2});
  LatticeMeasure mup = uniform_on({-1});
  OracleResult at0 = reachability_oracle(mu, mup, 0.0, {-10, 10});
  OracleResult at1 = reachability_oracle(mu, mup, 1.0, {-10, 10});
  // alpha=0: class {-1, 0, 1} with 0 -> -1; alpha=1: 0 -> 2 changes the set
  CHECK(at0.essential_member(0));
  CHECK(at0.scc_of(0) == at0.scc_of(-1));
  // at alpha=1 the class shifts to {0, 1, 2} and -1 becomes transient
  CHECK(at1.scc_of(0) == at1.scc_of(2));
  CHECK(at1.scc_of(0) != at1.scc_of(-1));
  CHECK_FALSE(at1.essential_member(-1));
  CHECK_FALSE(at0.scc_of(0) == at0.scc_of(2));
}

TEST_CASE("descriptor membership and enumeration agree") {
  ClassDescriptor d;
  d.residue = 1;
  d.delta = 3;
  d.lower = -8;
  d.upper = 13;
  d.excluded = {4, 7};
  std::vector<long long> listed = d.enumerate({-20, 20});
  for (long long x = -20; x <= 20; ++x) {
    bool in = std::find(listed.begin(), listed.end(), x) != listed.end();
    CHECK(in == d.contains(x));
  }
  ExcludedBand band{2, 4, 6, true};
  CHECK(band.contains(3));
  CHECK(band.contains(9));
  CHECK(band.contains(22));
  CHECK_FALSE(band.contains(-3));
  CHECK_FALSE(band.contains(5));
}
