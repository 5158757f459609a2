#pragma once

// Closed-form group-size law psi(nu) with nu = 2*beta*(N-1)/n_bar, its
// discrete normalization over N >= 2, likelihood fitting and the derived
// hierarchy and fission predictions.
//
// After normalization the law depends on (beta, n_bar) only through the scale
// s = 2*beta/n_bar: the prefactor 4/(sqrt(pi)*n_bar) is constant in N. A
// group-size spectrum alone therefore identifies s, not beta and n_bar
// separately; pin n_bar (e.g. from the contention peak) to recover beta.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace editdyn {

struct ModelParams {
  double beta = 1.0;   // intolerance for contention back-pressure
  double n_bar = 8.0;  // group size at the contention maximum

  double scale() const { return 2.0 * beta / n_bar; }
  void validate() const;  // beta > 0, n_bar > 1
};

// 2*beta*(N-1)/n_bar. Throws DomainError for N < 1.
double nu(int n, const ModelParams& p);

// 4/sqrt(pi) * sqrt(nu) * exp(-nu) / n_bar at real N >= 1, as printed; it
// integrates to 1/beta over [1, inf).
double psi_density(double n, const ModelParams& p);

// Continuous mode 1 + n_bar/(4*beta), where nu = 1/2.
double continuous_mode(const ModelParams& p);

// Smallest n_max whose truncated tail mass is below `tail`.
int support_limit(const ModelParams& p, double tail = 1e-12);

struct Pmf {
  int n_min = 2;
  int n_max = 2;
  std::vector<double> p;  // p[N - n_min]
  double z = 0.0;         // sum of psi_density over the support

  double at(int n) const { return n < n_min || n > n_max ? 0.0 : p[static_cast<std::size_t>(n - n_min)]; }
  int argmax() const;
  double mean() const;
};

// Renormalized over N = 2..n_max. Requires n_max >= 3.
Pmf pmf(const ModelParams& p, int n_max);
Pmf pmf(const ModelParams& p);  // n_max = support_limit(p)

struct GroupSpectrum {
  std::map<int, std::int64_t> counts;  // N -> episodes

  static GroupSpectrum from_sizes(const std::vector<int>& sizes);
  std::int64_t total() const;
  double frequency(int n) const;
  int mode() const;  // smallest N among the most frequent; 0 when empty
  double mean() const;
  GroupSpectrum without_singletons() const;
  GroupSpectrum scaled(std::int64_t factor) const;
};

inline constexpr double kLogLikelihoodFloor = -1e300;

struct LikelihoodDetail {
  double value = 0.0;
  std::int64_t excluded_singletons = 0;  // N = 1 rows left out
  bool underflow = false;                // some observed N had pmf below the floor
};

// sum_N counts(N) * ln pmf(N) over N >= 2. Throws Error on an empty spectrum.
LikelihoodDetail log_likelihood_detail(const GroupSpectrum& s, const ModelParams& p);
double log_likelihood(const GroupSpectrum& s, const ModelParams& p);

struct FitOptions {
  std::optional<double> fixed_n_bar;  // condition on a known contention scale
  bool least_squares = false;         // squared error on frequencies instead of ML
  double beta_lo = 0.5, beta_hi = 2.0, beta_step = 0.01;
  double n_bar_lo = 2.0, n_bar_hi = 30.0, n_bar_step = 0.05;
  double tolerance = 1e-4;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_at_bound = false;
  bool hi_at_bound = false;
};

struct FitReport {
  ModelParams params;
  double z = 0.0;
  int n_max = 0;
  double objective = 0.0;  // log-likelihood, or minus squared error
  double log_likelihood = 0.0;
  double scale = 0.0;      // fitted 2*beta/n_bar
  Interval scale_interval;
  Interval beta_interval;  // profile 1-unit intervals
  Interval n_bar_interval;
  double chi_square = 0.0;
  int chi_square_bins = 0;
  int chi_square_dof = 0;
  double chi_square_p = 0.0;  // NaN when dof < 1
  std::int64_t total = 0;     // episodes with N >= 2
  std::int64_t excluded_singletons = 0;
  bool low_confidence = false;  // total < 100
  bool joint = true;            // beta and n_bar both free: only s is identified
  std::string method;           // "ml" or "least-squares"
};

// Grid search then coordinate refinement. Throws UnderdeterminedError when the
// spectrum has fewer than two distinct sizes above 1.
FitReport fit(const GroupSpectrum& s, const FitOptions& options = {});

// Maximum-likelihood scale s = 2*beta/n_bar of a spectrum (N >= 2 rows).
double fit_scale(const GroupSpectrum& s);

struct MeanGroupSize {
  double continuous = 0.0;  // 1 + 3*n_bar/(4*beta)
  double discrete = 0.0;    // mean of pmf over its support
};

MeanGroupSize mean_group_size(const ModelParams& p);

// 2*beta; meaningful only for N >> 2*beta.
double fission_ratio(const ModelParams& p);

// Scales obtained by repeatedly multiplying by the contention-peak to mode
// ratio s / (1 + s/(4*beta)), starting at `seed`. Throws DomainError when the
// ratio is <= 1 (the hierarchy would not ascend).
std::vector<double> dunbar_series(double beta, double seed, int levels);

}  // namespace editdyn
