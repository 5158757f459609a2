#pragma once

// Birth/death simulator of episodic group formation whose stationary
// group-size law is the model pmf.

#include <cstdint>
#include <string>
#include <vector>

#include "editdyn/model.hpp"

namespace editdyn {

enum class RateScheme {
  DetailedBalance,  // Metropolis-style rates from the target ratio
  Kinetic,          // sqrt(nu) attachment growth, exp(gamma*dnu) dissipation
};

// Uniformized birth/death chain on N = 2..n_cap.
struct ChainRates {
  int n_min = 2;
  int n_cap = 3;
  std::vector<double> birth;  // birth[N - 2] = lambda_N; zero at n_cap
  std::vector<double> death;  // death[N - 2] = mu_N; zero at N = 2
  std::vector<std::string> warnings;

  double lambda(int n) const { return birth[static_cast<std::size_t>(n - n_min)]; }
  double mu(int n) const { return death[static_cast<std::size_t>(n - n_min)]; }
};

// Target law sqrt(nu) * exp(-exponent * nu); exponent 1 is the model pmf.
// n_cap shrinks (with a warning) where the target underflows.
ChainRates build_chain(const ModelParams& p, int n_cap, double attachment_exponent = 1.0,
                       RateScheme scheme = RateScheme::DetailedBalance);

struct SimConfig {
  ModelParams params;
  std::int64_t episodes = 10000;
  std::uint64_t seed = 1;
  int n_cap = 0;  // 0: ceil(10 * n_bar)
  double attachment_exponent = 1.0;
  RateScheme rates = RateScheme::DetailedBalance;
  int burn_in_factor = 100;  // steps per episode = factor * n_cap
  unsigned threads = 0;      // 0: hardware concurrency

  int effective_n_cap() const;
  void validate() const;
};

struct SimResult {
  std::vector<int> sizes;  // final size of each episode, in episode order
  std::int64_t births = 0;
  std::int64_t deaths = 0;
  GroupSpectrum empirical;
  std::vector<std::string> warnings;
};

// Every episode starts at N = 2 and runs its own RNG stream derived from
// (seed, episode index), so the result does not depend on thread count.
SimResult simulate(const SimConfig& cfg);

double total_variation(const GroupSpectrum& s, const Pmf& p);

struct SweepRow {
  double beta = 0.0;
  double mode = 0.0;   // continuous mode 1 + 1/(2 s_hat) of the simulated sample
  double mean = 0.0;   // empirical mean size
  double ratio = 0.0;  // n_bar / mode
  int discrete_mode = 0;
};

// One simulation per beta in [low, high] (inclusive) at `step`.
std::vector<SweepRow> sweep_beta(double low, double high, double step, const SimConfig& tmpl);

// Inverse-CDF draws, deterministic in `seed`.
std::vector<int> sample_from_pmf(const Pmf& p, std::size_t count, std::uint64_t seed);

}  // namespace editdyn
