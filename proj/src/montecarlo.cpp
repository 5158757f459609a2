#include "editdyn/montecarlo.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "editdyn/error.hpp"

namespace editdyn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 episode_stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ULL + 1)));
}

std::uint64_t probability_threshold(double p) {
  if (p <= 0) return 0;
  if (p >= 1) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(std::ldexp(p, 64));
}

}  // namespace

ChainRates build_chain(const ModelParams& p, int n_cap, double exponent, RateScheme scheme) {
  p.validate();
  if (n_cap <= 2) throw DomainError("n_cap must exceed 2");
  if (!(exponent > 0)) throw DomainError("attachment exponent must be positive");

  ChainRates chain;
  // log target weights, normalized, to find where the law underflows
  auto log_w = [&](int n) {
    double v = nu(n, p);
    return 0.5 * std::log(v) - exponent * v;
  };
  double peak = log_w(2);
  for (int n = 3; n <= n_cap; ++n) peak = std::max(peak, log_w(n));
  double sum = 0;
  for (int n = 2; n <= n_cap; ++n) sum += std::exp(log_w(n) - peak);
  const double log_z = peak + std::log(sum);
  int cap = n_cap;
  while (cap > 3 && log_w(cap) - log_z < std::log(DBL_MIN)) --cap;
  if (cap < n_cap)
    chain.warnings.push_back("target underflows beyond N=" + std::to_string(cap) + "; n_cap shrunk from " +
                             std::to_string(n_cap));
  chain.n_cap = cap;

  const std::size_t states = static_cast<std::size_t>(cap - 1);
  chain.birth.assign(states, 0.0);
  chain.death.assign(states, 0.0);
  const double s = p.scale();
  for (int n = 2; n < cap; ++n) {
    double ratio = std::exp(log_w(n + 1) - log_w(n));
    double up, down;
    if (scheme == RateScheme::DetailedBalance) {
      up = std::min(1.0, ratio);
      down = std::min(1.0, 1.0 / ratio);
    } else {
      up = std::sqrt(static_cast<double>(n) / (n - 1));
      down = std::exp(exponent * s);
    }
    chain.birth[static_cast<std::size_t>(n - 2)] = up;
    chain.death[static_cast<std::size_t>(n - 1)] = down;
  }
  double max_exit = 0;
  for (std::size_t i = 0; i < states; ++i) max_exit = std::max(max_exit, chain.birth[i] + chain.death[i]);
  for (std::size_t i = 0; i < states; ++i) {
    chain.birth[i] /= max_exit;
    chain.death[i] /= max_exit;
  }
  return chain;
}

int SimConfig::effective_n_cap() const {
  return n_cap > 0 ? n_cap : static_cast<int>(std::ceil(10.0 * params.n_bar));
}

void SimConfig::validate() const {
  params.validate();
  if (episodes < 1) throw DomainError("episodes must be at least 1");
  if (!(effective_n_cap() > params.n_bar)) throw DomainError("n_cap must exceed n_bar");
  if (burn_in_factor < 100) throw DomainError("burn-in factor must be at least 100");
}

SimResult simulate(const SimConfig& cfg) {
  cfg.validate();
  auto chain = build_chain(cfg.params, cfg.effective_n_cap(), cfg.attachment_exponent, cfg.rates);
  const int cap = chain.n_cap;
  const std::int64_t steps = static_cast<std::int64_t>(cfg.burn_in_factor) * cap;

  // Integer thresholds: draw x < up[N] -> birth, up[N] <= x < move[N] -> death.
  std::vector<std::uint64_t> up(static_cast<std::size_t>(cap + 1), 0), move(static_cast<std::size_t>(cap + 1), 0);
  for (int n = 2; n <= cap; ++n) {
    up[n] = probability_threshold(chain.lambda(n));
    move[n] = probability_threshold(chain.lambda(n) + chain.mu(n));
  }

  SimResult result;
  result.warnings = chain.warnings;
  result.sizes.assign(static_cast<std::size_t>(cfg.episodes), 0);
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::int64_t>(threads, cfg.episodes));
  std::vector<std::int64_t> births(threads, 0), deaths(threads, 0);

  auto run = [&](unsigned t) {
    for (std::int64_t e = t; e < cfg.episodes; e += threads) {
      auto rng = episode_stream(cfg.seed, static_cast<std::uint64_t>(e));
      int n = 2;
      std::int64_t b = 0, d = 0;
      for (std::int64_t k = 0; k < steps; ++k) {
        std::uint64_t x = rng();
        if (x < up[n]) {
          ++n;
          ++b;
        } else if (x < move[n]) {
          --n;
          ++d;
        }
      }
      result.sizes[static_cast<std::size_t>(e)] = n;
      births[t] += b;
      deaths[t] += d;
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run, t);
  }
  for (unsigned t = 0; t < threads; ++t) {
    result.births += births[t];
    result.deaths += deaths[t];
  }
  result.empirical = GroupSpectrum::from_sizes(result.sizes);
  return result;
}

double total_variation(const GroupSpectrum& s, const Pmf& p) {
  double tv = 0;
  const auto total = static_cast<double>(s.total());
  for (int n = p.n_min; n <= p.n_max; ++n) {
    auto it = s.counts.find(n);
    double f = it == s.counts.end() ? 0.0 : static_cast<double>(it->second) / total;
    tv += std::abs(f - p.at(n));
  }
  for (const auto& [n, c] : s.counts)
    if (n < p.n_min || n > p.n_max) tv += static_cast<double>(c) / total;
  return 0.5 * tv;
}

std::vector<SweepRow> sweep_beta(double low, double high, double step, const SimConfig& tmpl) {
  if (!(low > 0)) throw DomainError("sweep low must be positive");
  if (high < low) throw DomainError("sweep high must not be below low");
  if (!(step > 0) && high > low) throw DomainError("sweep step must be positive");
  std::vector<SweepRow> rows;
  const int count = high > low ? static_cast<int>(std::floor((high - low) / step + 1e-9)) + 1 : 1;
  for (int k = 0; k < count; ++k) {
    SimConfig cfg = tmpl;
    cfg.params.beta = low + k * step;
    auto sim = simulate(cfg);
    SweepRow row;
    row.beta = cfg.params.beta;
    row.mean = sim.empirical.mean();
    row.discrete_mode = sim.empirical.mode();
    row.mode = 1.0 + 1.0 / (2.0 * fit_scale(sim.empirical));
    row.ratio = cfg.params.n_bar / row.mode;
    rows.push_back(row);
  }
  return rows;
}

std::vector<int> sample_from_pmf(const Pmf& p, std::size_t count, std::uint64_t seed) {
  std::vector<double> cdf(p.p.size());
  double acc = 0;
  for (std::size_t i = 0; i < p.p.size(); ++i) cdf[i] = acc += p.p[i];
  std::mt19937_64 rng(splitmix64(seed));
  std::vector<int> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    out.push_back(p.n_min + static_cast<int>(it - cdf.begin()));
  }
  return out;
}

}  // namespace editdyn
