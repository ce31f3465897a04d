#include "oscwalk/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace oscwalk {

namespace {

// Streams below 2^62 belong to ensemble trajectories; helpers draw from the
// top range so a master seed never aliases across uses.
constexpr std::uint64_t kStreamBase = std::uint64_t{1} << 62;
constexpr std::uint64_t kStreamLadderPlus = kStreamBase + 0;
constexpr std::uint64_t kStreamLadderMinus = kStreamBase + 1;
constexpr std::uint64_t kStreamReductionA = kStreamBase + 2;
constexpr std::uint64_t kStreamReductionB = kStreamBase + 3;

constexpr std::size_t kPowerCdfLen = 1024;
constexpr long long kPowerSiteCap = 1LL << 62;

double tv_distance(const std::map<long long, double>& a,
                   const std::map<long long, double>& b) {
  double acc = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first))
      acc += std::abs((ia++)->second);
    else if (ia == a.end() || ib->first < ia->first)
      acc += std::abs((ib++)->second);
    else
      acc += std::abs((ia++)->second - (ib++)->second);
  }
  return 0.5 * acc;
}

std::map<long long, double> state_frequencies(
    const std::vector<std::pair<long long, long long>>& events) {
  std::map<long long, double> freq;
  if (events.empty()) return freq;
  double w = 1.0 / double(events.size());
  for (const auto& [t, s] : events) freq[s] += w;
  return freq;
}

}  // namespace

Sampler::Sampler(const LatticeMeasure& m) : m_(m) {
  switch (m_.kind()) {
    case LatticeMeasure::Kind::finite: {
      double acc = 0.0;
      for (const Atom& a : m_.atoms()) {
        sites_.push_back(a.site);
        acc += a.mass;
        cdf_.push_back(acc);
      }
      cdf_.back() = 1.0;
      break;
    }
    case LatticeMeasure::Kind::geometric:
      break;
    case LatticeMeasure::Kind::power: {
      // P[K <= k] for the first block of sites; beyond it the analytic tail
      // is bisected.
      bool pos = m_.tail_sign() == Sign::positive;
      for (std::size_t k = 1; k <= kPowerCdfLen; ++k) {
        long long kk = static_cast<long long>(k);
        cdf_.push_back(pos ? 1.0 - m_.upper_tail(kk)
                           : 1.0 - m_.lower_tail(kk));
      }
      break;
    }
  }
}

long long Sampler::draw(double u) const {
  switch (m_.kind()) {
    case LatticeMeasure::Kind::finite: {
      auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
      if (it == cdf_.end()) --it;
      return sites_[static_cast<std::size_t>(it - cdf_.begin())];
    }
    case LatticeMeasure::Kind::geometric: {
      double r = m_.ratio();
      long long k =
          static_cast<long long>(std::ceil(std::log1p(-u) / std::log(r)));
      k = std::max(1LL, k);
      return m_.tail_sign() == Sign::positive ? k : -k;
    }
    case LatticeMeasure::Kind::power: {
      bool pos = m_.tail_sign() == Sign::positive;
      if (u < cdf_.back()) {
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        long long k = static_cast<long long>(it - cdf_.begin()) + 1;
        return pos ? k : -k;
      }
      auto cdf_at = [&](long long k) {
        return pos ? 1.0 - m_.upper_tail(k) : 1.0 - m_.lower_tail(k);
      };
      long long lo = static_cast<long long>(kPowerCdfLen);
      long long hi = lo;
      while (cdf_at(hi) <= u && hi < kPowerSiteCap) hi *= 2;
      // smallest k with cdf(k) > u; a draw beyond the cap is clamped (the
      // event has probability below 2^-53 per unit of tail mass there)
      while (lo + 1 < hi) {
        long long mid = lo + (hi - lo) / 2;
        if (cdf_at(mid) > u)
          hi = mid;
        else
          lo = mid;
      }
      return pos ? hi : -hi;
    }
  }
  return 0;
}

WalkEngine::WalkEngine(const WalkSpec& spec)
    : spec_(spec), mu_sampler_(spec.mu), mup_sampler_(spec.mu_prime) {
  if (spec_.alpha < 0.0 || spec_.alpha > 1.0)
    throw std::invalid_argument("WalkEngine: alpha outside [0, 1]");
}

long long WalkEngine::step(long long x, CounterRng& rng) const {
  if (x <= -1) return x + mu_sampler_.draw(rng);
  if (x >= 1) return x + mup_sampler_.draw(rng);
  double a = spec_.alpha;
  if (a == 0.0) return x + mup_sampler_.draw(rng);
  if (a == 1.0) return x + mu_sampler_.draw(rng);
  bool use_mu = rng.next_unit() < a;
  return x + (use_mu ? mu_sampler_ : mup_sampler_).draw(rng);
}

TrajectoryStats run_trajectory(const WalkSpec& spec, long long n_steps,
                               std::uint64_t master_seed,
                               std::uint64_t stream) {
  if (n_steps < 1) throw std::invalid_argument("run_trajectory: n_steps < 1");
  WalkEngine engine(spec);
  CounterRng rng(master_seed, stream);
  TrajectoryStats st;
  long long x = spec.x0;
  long long anchor = spec.x0;
  bool prev_neg = x < 0;
  for (long long n = 1; n <= n_steps; ++n) {
    x = engine.step(x, rng);
    ++st.occupation[x];
    bool neg = x < 0;
    if (neg != prev_neg) st.crossings.emplace_back(n, x);
    prev_neg = neg;
    if (anchor <= -1) {
      // mu-driven stretch: a strict new maximum is the next ladder epoch
      if (x > anchor) {
        st.ladders.emplace_back(n, x);
        ++st.ladder_heights_plus[x - anchor];
        anchor = x;
      }
    } else if (x < anchor) {
      st.ladders.emplace_back(n, x);
      ++st.ladder_heights_minus[x - anchor];
      anchor = x;
    }
    if (x == 0) st.returns_to_zero.push_back(n);
  }
  st.steps = n_steps;
  st.final_state = x;
  return st;
}

EnsembleStats run_ensemble(const WalkSpec& spec, long long n_traj,
                           long long n_steps, std::uint64_t master_seed,
                           int parallelism) {
  if (n_traj < 1) throw std::invalid_argument("run_ensemble: n_traj < 1");
  int workers = static_cast<int>(
      std::min<long long>(std::max(1, parallelism), n_traj));
  std::vector<TrajectoryStats> slots(static_cast<std::size_t>(n_traj));
  std::atomic<long long> cursor{0};
  auto work = [&]() {
    for (;;) {
      long long i = cursor.fetch_add(1);
      if (i >= n_traj) break;
      slots[static_cast<std::size_t>(i)] = run_trajectory(
          spec, n_steps, master_seed, static_cast<std::uint64_t>(i));
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  EnsembleStats out;
  out.n_traj = n_traj;
  for (const TrajectoryStats& st : slots) {
    for (const auto& [s, c] : st.occupation) out.occupation[s] += c;
    for (const auto& [t, s] : st.crossings) ++out.crossing_states[s];
    for (const auto& [t, s] : st.ladders) ++out.ladder_states[s];
    for (const auto& [h, c] : st.ladder_heights_plus)
      out.ladder_heights_plus[h] += c;
    for (const auto& [h, c] : st.ladder_heights_minus)
      out.ladder_heights_minus[h] += c;
    out.crossings += static_cast<long long>(st.crossings.size());
    out.ladders += static_cast<long long>(st.ladders.size());
    out.steps += st.steps;
    // return intervals: from time 0 when the walk starts at 0, otherwise the
    // first visit is a hitting time and only subsequent gaps count
    long long prev = spec.x0 == 0 ? 0 : -1;
    for (long long t : st.returns_to_zero) {
      if (prev >= 0) out.return_intervals.push_back(t - prev);
      prev = t;
    }
  }
  return out;
}

double EmpiricalMeasure::frequency(long long site) const {
  if (sample_size == 0) return 0.0;
  auto it = counts.find(site);
  return it == counts.end() ? 0.0
                            : double(it->second) / double(sample_size);
}

LatticeMeasure EmpiricalMeasure::to_measure() const {
  if (sample_size <= 0)
    throw std::domain_error("EmpiricalMeasure: no accepted samples");
  std::vector<Atom> atoms;
  atoms.reserve(counts.size());
  double total = 0.0;
  for (const auto& [site, c] : counts) {
    double w = double(c) / double(sample_size);
    atoms.push_back({site, w});
    total += w;
  }
  atoms.back().mass += 1.0 - total;
  return LatticeMeasure::finite_atoms(std::move(atoms));
}

std::pair<EmpiricalMeasure, EmpiricalMeasure> empirical_ladder_measures(
    const WalkSpec& spec, long long n_samples, std::uint64_t seed,
    long long max_epoch_steps) {
  if (n_samples < 1)
    throw std::invalid_argument("empirical_ladder_measures: n_samples < 1");
  Sampler up(spec.mu);
  Sampler down(spec.mu_prime);
  EmpiricalMeasure plus, minus;
  CounterRng rng_p(seed, kStreamLadderPlus);
  CounterRng rng_m(seed, kStreamLadderMinus);
  for (long long i = 0; i < n_samples; ++i) {
    long long s = 0;
    bool hit = false;
    for (long long n = 0; n < max_epoch_steps; ++n) {
      s += up.draw(rng_p);
      if (s > 0) {
        ++plus.counts[s];
        hit = true;
        break;
      }
    }
    hit ? ++plus.sample_size : ++plus.censored;
  }
  for (long long i = 0; i < n_samples; ++i) {
    long long s = 0;
    bool hit = false;
    for (long long n = 0; n < max_epoch_steps; ++n) {
      s += down.draw(rng_m);
      if (s < 0) {
        ++minus.counts[s];
        hit = true;
        break;
      }
    }
    hit ? ++minus.sample_size : ++minus.censored;
  }
  plus.censor_warning = double(plus.censored) > 0.01 * double(n_samples);
  minus.censor_warning = double(minus.censored) > 0.01 * double(n_samples);
  return {std::move(plus), std::move(minus)};
}

LadderReductionReport ladder_reduction_check(const WalkSpec& spec,
                                             long long n_steps,
                                             std::uint64_t seed) {
  if (n_steps < 1)
    throw std::invalid_argument("ladder_reduction_check: n_steps < 1");
  LadderReductionReport rep;
  auto [hat_plus, hat_minus] =
      empirical_ladder_measures(spec, 100000, seed);
  rep.mu_hat_plus = hat_plus;
  rep.mu_hat_minus = hat_minus;
  rep.censor_warning = hat_plus.censor_warning || hat_minus.censor_warning;

  // the reduction statement concerns the alpha = 0 walk
  WalkSpec original = spec;
  original.alpha = 0.0;
  TrajectoryStats a =
      run_trajectory(original, n_steps, seed, kStreamReductionA);
  rep.ladders_original = static_cast<long long>(a.ladders.size());
  rep.crossings_original = static_cast<long long>(a.crossings.size());
  if (rep.ladders_original > 0) {
    long long zeros = 0;
    for (const auto& [t, s] : a.ladders) zeros += s == 0 ? 1 : 0;
    rep.zero_freq_original = double(zeros) / double(rep.ladders_original);
    rep.crossing_rate_original =
        double(rep.crossings_original) / double(rep.ladders_original);
  }

  WalkSpec reduced{hat_plus.to_measure(), hat_minus.to_measure(), 0.0,
                   spec.x0};
  long long nb = std::max<long long>(1, rep.ladders_original);
  TrajectoryStats b = run_trajectory(reduced, nb, seed, kStreamReductionB);
  rep.crossings_reduced = static_cast<long long>(b.crossings.size());
  rep.crossing_rate_reduced = double(rep.crossings_reduced) / double(nb);
  auto it0 = b.occupation.find(0);
  rep.zero_freq_reduced =
      it0 == b.occupation.end() ? 0.0 : double(it0->second) / double(nb);

  rep.tv_crossing_states = tv_distance(state_frequencies(a.crossings),
                                       state_frequencies(b.crossings));
  return rep;
}

}  // namespace oscwalk
