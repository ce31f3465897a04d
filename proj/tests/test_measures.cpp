#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "oscwalk/measure.hpp"

using namespace oscwalk;

namespace {

LatticeMeasure half_half() {
  return LatticeMeasure::finite_atoms({{1, 0.5}, {2, 0.5}});
}

const double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("finite measure basics") {
  LatticeMeasure m = LatticeMeasure::finite_atoms({{-4, 0.5}, {-1, 0.5}});
  CHECK(m.mass(-4) == 0.5);
  CHECK(m.mass(-2) == 0.0);
  CHECK(m.strictly_negative());
  CHECK_FALSE(m.strictly_positive());
  SupportSummary s = m.support_summary();
  CHECK(*s.max_site == -1);
  CHECK(*s.min_site == -4);
  CHECK(s.gcd == 1);
  CHECK(s.sign_class == SignClass::strictly_negative);
  CHECK(m.lower_tail(2) == 0.5);   // mass strictly below -2
  CHECK(m.lower_tail(0) == 1.0);   // mass strictly below 0
  CHECK(m.upper_tail(-2) == 0.5);
  CHECK(m.interval_mass(-4, -2) == 0.5);
}

TEST_CASE("finite atoms validation") {
  CHECK_THROWS(LatticeMeasure::finite_atoms({{1, 0.4}}));
  CHECK_THROWS(LatticeMeasure::finite_atoms({}));
  CHECK_THROWS(LatticeMeasure::finite_atoms({{1, -0.2}, {2, 1.2}}));
  CHECK_THROWS(LatticeMeasure::geometric(Sign::positive, 0.0));
  CHECK_THROWS(LatticeMeasure::geometric(Sign::positive, 1.0));
  CHECK_THROWS(LatticeMeasure::power(Sign::negative, 1.0));
}

TEST_CASE("geometric tails") {
  LatticeMeasure g = LatticeMeasure::geometric(Sign::positive, 0.5);
  CHECK(g.mass(1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(g.mass(3) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(g.mass(-1) == 0.0);
  CHECK(g.upper_tail(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g.upper_tail(4) == doctest::Approx(std::pow(0.5, 4)).epsilon(1e-14));
  SupportSummary s = g.support_summary();
  CHECK_FALSE(s.max_site.has_value());
  CHECK(*s.min_site == 1);
  CHECK(s.gcd == 1);
}

TEST_CASE("power tails and moments") {
  LatticeMeasure p = LatticeMeasure::power(Sign::positive, 2.5);
  double z = 0.0;
  for (long long k = 1; k <= 2000000; ++k) z += std::pow(k, -2.5);
  CHECK(p.mass(1) == doctest::Approx(1.0 / z).epsilon(1e-6));
  CHECK(p.mass(10) == doctest::Approx(std::pow(10.0, -2.5) / z).epsilon(1e-6));

  // p-th moment finite exactly when p < s - 1
  CHECK(std::isfinite(p.moment(1.2)));
  CHECK(p.moment(1.8) == kInf);
  CHECK(p.moment(1.5) == kInf);
  LatticeMeasure g = LatticeMeasure::geometric(Sign::negative, 0.3);
  CHECK(std::isfinite(g.moment(7.0)));
}

TEST_CASE("tail difference equals pointwise mass") {
  std::vector<LatticeMeasure> ms = {
      half_half(), LatticeMeasure::geometric(Sign::positive, 0.4),
      LatticeMeasure::power(Sign::positive, 2.2)};
  for (const auto& m : ms)
    for (long long n = 0; n <= 30; ++n)
      CHECK(m.upper_tail(n) - m.upper_tail(n + 1) ==
            doctest::Approx(m.mass(n + 1)).epsilon(1e-12));
  std::vector<LatticeMeasure> neg = {
      LatticeMeasure::finite_atoms({{-4, 0.5}, {-1, 0.5}}),
      LatticeMeasure::geometric(Sign::negative, 0.6),
      LatticeMeasure::power(Sign::negative, 3.1)};
  for (const auto& m : neg)
    for (long long n = 0; n <= 30; ++n)
      CHECK(m.lower_tail(n) - m.lower_tail(n + 1) ==
            doctest::Approx(m.mass(-n - 1)).epsilon(1e-12));
}

TEST_CASE("moments are monotone in the order") {
  std::vector<LatticeMeasure> ms = {
      half_half(), LatticeMeasure::geometric(Sign::negative, 0.5),
      LatticeMeasure::power(Sign::positive, 3.5),
      LatticeMeasure::finite_atoms({{-3, 0.25}, {1, 0.25}, {5, 0.5}})};
  for (const auto& m : ms) {
    double prev = 0.0;
    for (double p = 0.25; p <= 2.0; p += 0.25) {
      double cur = m.moment(p);
      CHECK(cur >= prev - 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("truncation accounting") {
  LatticeMeasure g = LatticeMeasure::geometric(Sign::positive, 0.5);
  Truncation t = g.truncate(1e-6);
  double kept = 0.0;
  for (const Atom& a : t.atoms) kept += a.mass;
  CHECK(kept + t.lost_mass == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t.lost_mass <= 1e-6);
  CHECK(t.atoms.front().site == 1);

  LatticeMeasure f = half_half();
  Truncation tf = f.truncate(1e-12);
  CHECK(tf.atoms.size() == 2);
  CHECK(tf.lost_mass == 0.0);

  CHECK(g.support_cutoff(1e-6) == t.atoms.back().site);
}

TEST_CASE("support_in lists sites with mass above threshold") {
  LatticeMeasure g = LatticeMeasure::geometric(Sign::negative, 0.5);
  auto sites = g.support_in(-5, 5, 1e-12);
  CHECK(sites == std::vector<long long>{-5, -4, -3, -2, -1});
  auto f = half_half().support_in(-3, 1, 1e-12);
  CHECK(f == std::vector<long long>{1});
}

TEST_CASE("renewal potential frozen values") {
  // mu = {1: 1/2, 2: 1/2}: U = 1, 1/2, 3/4, 5/8, ...
  Potential u = potential(half_half(), Sign::positive, 6);
  CHECK(u.at(0) == doctest::Approx(1.0));
  CHECK(u.at(1) == doctest::Approx(0.5));
  CHECK(u.at(2) == doctest::Approx(0.75));
  CHECK(u.at(3) == doctest::Approx(0.625));
  // renewal values approach 1/mean = 2/3
  CHECK(potential(half_half(), Sign::positive, 60).at(60) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-9));

  Potential up = potential(LatticeMeasure::finite_atoms({{-1, 1.0}}),
                           Sign::negative, 5);
  for (long long t = 0; t <= 5; ++t) CHECK(up.at(-t) == doctest::Approx(1.0));

  CHECK_THROWS(potential(half_half(), Sign::negative, 4));
  CHECK_THROWS(potential(
      LatticeMeasure::finite_atoms({{-1, 0.5}, {1, 0.5}}), Sign::positive, 4));
}

TEST_CASE("potential solves the renewal equation entrywise") {
  // (delta_0 - m) * U = delta_0, i.e. U(t) = 1{t=0} + sum_k m(k) U(t-k)
  std::vector<LatticeMeasure> ms = {
      half_half(), LatticeMeasure::geometric(Sign::positive, 0.7),
      LatticeMeasure::power(Sign::positive, 2.4),
      LatticeMeasure::finite_atoms({{2, 0.3}, {5, 0.7}})};
  for (const auto& m : ms) {
    Potential u = potential(m, Sign::positive, 50);
    for (long long t = 0; t <= 50; ++t) {
      double conv = 0.0;
      for (long long k = 1; k <= t; ++k) conv += m.mass(k) * u.at(t - k);
      double expected = (t == 0 ? 1.0 : 0.0) + conv;
      CHECK(std::abs(u.at(t) - expected) <= 1e-12);
      CHECK(u.at(t) <= 1.0 + 1e-12);
      CHECK(u.at(t) >= 0.0);
    }
  }
}

TEST_CASE("tail sum bounds dominate the true remainders") {
  std::vector<LatticeMeasure> ms = {
      LatticeMeasure::geometric(Sign::positive, 0.6),
      LatticeMeasure::power(Sign::positive, 3.2), half_half()};
  for (const auto& m : ms) {
    for (long long n : {-3LL, 0LL, 4LL, 9LL}) {
      double bound = m.upper_tail_sum_bound(n);
      double partial = 0.0;
      for (long long k = n + 1; k <= n + 4000; ++k) partial += m.upper_tail(k);
      CHECK(partial <= bound + 1e-12);
    }
  }
  LatticeMeasure heavy = LatticeMeasure::power(Sign::positive, 1.8);
  CHECK(heavy.upper_tail_sum_bound(5) == kInf);  // infinite mean
}

TEST_CASE("ZMeasure window semantics") {
  ZMeasure z = ZMeasure::zeros({-2, 2});
  z.set(0, 1.5);
  z.add(2, 0.5);
  z.add(7, 100.0);  // outside, ignored
  CHECK(z.at(0) == 1.5);
  CHECK(z.at(7) == 0.0);
  CHECK(z.sum() == doctest::Approx(2.0));
}

TEST_CASE("convolution examples") {
  Truncation a = LatticeMeasure::finite_atoms({{3, 1.0}}).truncate(0.0);
  Truncation b = LatticeMeasure::finite_atoms({{-1, 1.0}}).truncate(0.0);
  ZMeasure d = convolve(a, b, {-5, 5});
  CHECK(d.at(2) == doctest::Approx(1.0));
  CHECK(d.sum() == doctest::Approx(1.0));

  Truncation h = half_half().truncate(0.0);
  ZMeasure sq = convolve(h, h, {0, 5});
  CHECK(sq.at(2) == doctest::Approx(0.25));
  CHECK(sq.at(3) == doctest::Approx(0.5));
  CHECK(sq.at(4) == doctest::Approx(0.25));
}

TEST_CASE("one sided means") {
  LatticeMeasure m = LatticeMeasure::finite_atoms({{-3, 0.25}, {2, 0.75}});
  CHECK(m.mean_positive_part() == doctest::Approx(1.5));
  CHECK(m.mean_negative_part() == doctest::Approx(0.75));
  LatticeMeasure heavy = LatticeMeasure::power(Sign::positive, 1.5);
  CHECK(heavy.mean_positive_part() == kInf);
  CHECK(heavy.mean_negative_part() == 0.0);
}

TEST_CASE("floor_mod") {
  CHECK(floor_mod(7, 3) == 1);
  CHECK(floor_mod(-7, 3) == 2);
  CHECK(floor_mod(-6, 3) == 0);
  CHECK(floor_mod(0, 5) == 0);
}
