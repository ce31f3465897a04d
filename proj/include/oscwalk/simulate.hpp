#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oscwalk/measure.hpp"
#include "oscwalk/rng.hpp"

namespace oscwalk {

// Exact inversion sampler. Finite supports and the geometric tail invert
// their CDFs in closed form; the power tail uses a prefix table and falls
// back to bisection on the analytic tail, so no variant carries truncation
// bias.
class Sampler {
 public:
  explicit Sampler(const LatticeMeasure& m);
  long long draw(double u) const;  // u in [0,1)
  long long draw(CounterRng& rng) const { return draw(rng.next_unit()); }

 private:
  LatticeMeasure m_;
  std::vector<long long> sites_;  // finite variant
  std::vector<double> cdf_;       // finite variant, or power prefix P[K <= k]
};

struct WalkSpec {
  LatticeMeasure mu;        // active at x <= -1
  LatticeMeasure mu_prime;  // active at x >= 1
  double alpha = 0.0;       // mixture weight of mu at x = 0
  long long x0 = 0;
};

class WalkEngine {
 public:
  explicit WalkEngine(const WalkSpec& spec);
  // One transition. At x = 0 with alpha in (0,1) a branch uniform is drawn
  // first; the endpoints consume a single uniform.
  long long step(long long x, CounterRng& rng) const;
  const WalkSpec& spec() const { return spec_; }

 private:
  WalkSpec spec_;
  Sampler mu_sampler_;
  Sampler mup_sampler_;
};

struct TrajectoryStats {
  std::map<long long, long long> occupation;  // states at steps 1..n
  std::vector<std::pair<long long, long long>> crossings;  // (time, state)
  std::vector<std::pair<long long, long long>> ladders;    // (time, state)
  std::vector<long long> returns_to_zero;                  // times
  std::map<long long, long long> ladder_heights_plus;      // height -> count
  std::map<long long, long long> ladder_heights_minus;
  long long steps = 0;
  long long final_state = 0;
};

// Crossing times follow the sign change of (state < 0); at alpha = 0 this is
// exactly the first-passage definition (state 0 on the nonnegative side).
// Ladder times use the running-record rule: from an anchor <= -1 the next
// ladder is the first strict ascent above the anchor, from an anchor >= 0
// the first strict descent below it.
TrajectoryStats run_trajectory(const WalkSpec& spec, long long n_steps,
                               std::uint64_t master_seed,
                               std::uint64_t stream);

struct EnsembleStats {
  std::map<long long, long long> occupation;
  std::map<long long, long long> crossing_states;
  std::map<long long, long long> ladder_states;
  std::map<long long, long long> ladder_heights_plus;
  std::map<long long, long long> ladder_heights_minus;
  std::vector<long long> return_intervals;  // per-trajectory consecutive gaps
  long long crossings = 0;
  long long ladders = 0;
  long long steps = 0;
  long long n_traj = 0;
};

// Trajectory i always uses stream i of master_seed and results merge in
// index order, so the output is bit-identical for every parallelism degree.
EnsembleStats run_ensemble(const WalkSpec& spec, long long n_traj,
                           long long n_steps, std::uint64_t master_seed,
                           int parallelism);

struct EmpiricalMeasure {
  std::map<long long, long long> counts;
  long long sample_size = 0;  // accepted samples
  long long censored = 0;     // epochs cut at the step cap
  bool censor_warning = false;

  double frequency(long long site) const;
  // Normalized finite measure; the largest-site atom absorbs the rounding
  // residual so the masses sum to exactly 1.
  LatticeMeasure to_measure() const;
};

// Strict ascending ladder heights of the mu walk and strict descending
// ladder heights of the mu' walk, sampled independently. Epoch searches are
// capped; censored epochs are counted, and a fraction above 1% raises the
// warning flag.
std::pair<EmpiricalMeasure, EmpiricalMeasure> empirical_ladder_measures(
    const WalkSpec& spec, long long n_samples, std::uint64_t seed,
    long long max_epoch_steps = 1000000);

struct LadderReductionReport {
  double tv_crossing_states = 0.0;  // original vs reduced walk
  double crossing_rate_original = 0.0;  // crossings per ladder epoch
  double crossing_rate_reduced = 0.0;   // crossings per reduced-walk step
  double zero_freq_original = 0.0;      // zero frequency over ladder states
  double zero_freq_reduced = 0.0;       // zero frequency over reduced path
  long long ladders_original = 0;
  long long crossings_original = 0;
  long long crossings_reduced = 0;
  EmpiricalMeasure mu_hat_plus;
  EmpiricalMeasure mu_hat_minus;
  bool censor_warning = false;
};

// Self-consistency check of the ladder reduction: the walk observed at its
// ladder times should look like the oscillating walk driven by the ladder
// height laws. Runs the original for n_steps, the reduced walk for as many
// steps as ladder epochs were seen, and compares crossing-state laws.
LadderReductionReport ladder_reduction_check(const WalkSpec& spec,
                                             long long n_steps,
                                             std::uint64_t seed);

}  // namespace oscwalk
