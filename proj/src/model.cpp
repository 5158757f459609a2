#include "editdyn/model.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "editdyn/error.hpp"

namespace editdyn {

void ModelParams::validate() const {
  if (!(beta > 0) || !std::isfinite(beta)) throw DomainError("beta must be positive");
  if (!(n_bar > 1) || !std::isfinite(n_bar)) throw DomainError("n_bar must exceed 1");
}

double nu(int n, const ModelParams& p) {
  if (n < 1) throw DomainError("group size must be at least 1");
  return 2.0 * p.beta * (n - 1) / p.n_bar;
}

double psi_density(double n, const ModelParams& p) {
  if (!(n >= 1)) throw DomainError("group size must be at least 1");
  double v = 2.0 * p.beta * (n - 1.0) / p.n_bar;
  return 4.0 / std::sqrt(std::numbers::pi) * std::sqrt(v) * std::exp(-v) / p.n_bar;
}

double continuous_mode(const ModelParams& p) { return 1.0 + p.n_bar / (4.0 * p.beta); }

int support_limit(const ModelParams& p, double tail) {
  p.validate();
  // Tail of nu ~ Gamma(3/2, 1) beyond x.
  static const double default_x = boost::math::gamma_q_inv(1.5, 1e-12);
  double x = tail == 1e-12 ? default_x : boost::math::gamma_q_inv(1.5, tail);
  double n = 2.0 + std::ceil(x / p.scale());
  return static_cast<int>(std::clamp(n, 3.0, 1e7));
}

int Pmf::argmax() const {
  auto it = std::max_element(p.begin(), p.end());
  return n_min + static_cast<int>(it - p.begin());
}

double Pmf::mean() const {
  double m = 0;
  for (std::size_t i = 0; i < p.size(); ++i) m += (n_min + static_cast<double>(i)) * p[i];
  return m;
}

Pmf pmf(const ModelParams& params, int n_max) {
  params.validate();
  if (n_max < 3) throw DomainError("n_max must be at least 3");
  Pmf out;
  out.n_max = n_max;
  out.p.resize(static_cast<std::size_t>(n_max - 1));
  for (int n = 2; n <= n_max; ++n) {
    double w = psi_density(n, params);
    out.p[static_cast<std::size_t>(n - 2)] = w;
    out.z += w;
  }
  for (auto& v : out.p) v /= out.z;
  return out;
}

Pmf pmf(const ModelParams& p) { return pmf(p, support_limit(p)); }

// --- spectra ------------------------------------------------------------------

GroupSpectrum GroupSpectrum::from_sizes(const std::vector<int>& sizes) {
  GroupSpectrum s;
  for (int n : sizes) {
    if (n < 1) throw DomainError("group sizes must be at least 1");
    ++s.counts[n];
  }
  return s;
}

std::int64_t GroupSpectrum::total() const {
  std::int64_t t = 0;
  for (const auto& [_, c] : counts) t += c;
  return t;
}

double GroupSpectrum::frequency(int n) const {
  auto t = total();
  auto it = counts.find(n);
  return t == 0 || it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(t);
}

int GroupSpectrum::mode() const {
  int best = 0;
  std::int64_t best_count = 0;
  for (const auto& [n, c] : counts)
    if (c > best_count) {
      best = n;
      best_count = c;
    }
  return best;
}

double GroupSpectrum::mean() const {
  auto t = total();
  if (t == 0) return 0.0;
  double m = 0;
  for (const auto& [n, c] : counts) m += static_cast<double>(n) * static_cast<double>(c);
  return m / static_cast<double>(t);
}

GroupSpectrum GroupSpectrum::without_singletons() const {
  GroupSpectrum s = *this;
  s.counts.erase(1);
  for (auto it = s.counts.begin(); it != s.counts.end();) it = it->second == 0 ? s.counts.erase(it) : std::next(it);
  return s;
}

GroupSpectrum GroupSpectrum::scaled(std::int64_t factor) const {
  GroupSpectrum s = *this;
  for (auto& [_, c] : s.counts) c *= factor;
  return s;
}

// --- likelihood -----------------------------------------------------------------

namespace {

const double kLogMin = std::log(DBL_MIN);

// Log-likelihood as a function of the identifiable scale s only; the
// normalization constant of psi cancels between numerator and z.
class ScaleLikelihood {
 public:
  explicit ScaleLikelihood(const GroupSpectrum& s) {
    for (const auto& [n, c] : s.counts) {
      if (n < 2 || c == 0) continue;
      obs_.emplace_back(n, static_cast<double>(c));
      total_ += static_cast<double>(c);
      max_n_ = std::max(max_n_, n);
    }
  }

  double operator()(double s) const {
    int k_max = std::max(max_n_ - 1, support_limit(ModelParams{s, 2.0}) - 1);
    double z = 0;
    for (int k = 1; k <= k_max; ++k) z += std::sqrt(s * k) * std::exp(-s * k);
    double log_z = std::log(z);
    double l = 0;
    for (const auto& [n, c] : obs_) {
      double x = s * (n - 1);
      double log_p = 0.5 * std::log(x) - x - log_z;
      if (log_p < kLogMin) return kLogLikelihoodFloor;
      l += c * log_p;
    }
    return l;
  }

  double total() const { return total_; }
  int max_n() const { return max_n_; }
  std::size_t distinct() const { return obs_.size(); }

 private:
  std::vector<std::pair<int, double>> obs_;
  double total_ = 0;
  int max_n_ = 2;
};

double golden_max(const std::function<double(double)>& f, double a, double b, double tol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Contiguous region around `center` where f >= threshold, within [lo, hi].
Interval level_interval(const std::function<double(double)>& f, double center, double lo, double hi,
                        double threshold, double step) {
  Interval out;
  auto edge = [&](double dir, double bound, bool& at_bound) {
    double inside = center;
    for (;;) {
      double next = inside + dir * step;
      if ((dir > 0 && next >= bound) || (dir < 0 && next <= bound)) {
        if (f(bound) >= threshold) {
          at_bound = true;
          return bound;
        }
        next = bound;
      }
      if (f(next) < threshold) {
        double a = inside, b = next;
        for (int it = 0; it < 60; ++it) {
          double m = 0.5 * (a + b);
          (f(m) >= threshold ? a : b) = m;
        }
        return 0.5 * (a + b);
      }
      inside = next;
    }
  };
  out.lo = edge(-1.0, lo, out.lo_at_bound);
  out.hi = edge(+1.0, hi, out.hi_at_bound);
  return out;
}

struct ChiSquare {
  double statistic = 0.0;
  int bins = 0;
};

ChiSquare chi_square(const GroupSpectrum& s, const Pmf& model, double total) {
  ChiSquare out;
  double obs = 0, expct = 0, last_obs = 0, last_exp = 0;
  bool have_last = false;
  auto close = [&] {
    if (have_last) {
      out.statistic += (last_obs - last_exp) * (last_obs - last_exp) / last_exp;
      ++out.bins;
    }
    last_obs = obs;
    last_exp = expct;
    have_last = true;
    obs = expct = 0;
  };
  for (int n = model.n_min; n <= model.n_max; ++n) {
    auto it = s.counts.find(n);
    obs += it == s.counts.end() ? 0.0 : static_cast<double>(it->second);
    expct += total * model.at(n);
    if (expct >= 5.0) close();
  }
  // Remainder of the tail joins the last full bin.
  last_obs += obs;
  last_exp += expct;
  if (last_exp > 0) {
    out.statistic += (last_obs - last_exp) * (last_obs - last_exp) / last_exp;
    ++out.bins;
  }
  return out;
}

}  // namespace

LikelihoodDetail log_likelihood_detail(const GroupSpectrum& s, const ModelParams& p) {
  p.validate();
  LikelihoodDetail d;
  auto it1 = s.counts.find(1);
  d.excluded_singletons = it1 == s.counts.end() ? 0 : it1->second;
  auto kept = s.without_singletons();
  if (kept.total() == 0) throw Error("empty spectrum");
  int n_max = std::max(support_limit(p), kept.counts.rbegin()->first);
  auto model = pmf(p, std::max(n_max, 3));
  for (const auto& [n, c] : kept.counts) {
    double q = model.at(n);
    if (!(q >= DBL_MIN)) {
      d.underflow = true;
      d.value = kLogLikelihoodFloor;
      return d;
    }
    d.value += static_cast<double>(c) * std::log(q);
  }
  return d;
}

double log_likelihood(const GroupSpectrum& s, const ModelParams& p) { return log_likelihood_detail(s, p).value; }

// --- fitting ------------------------------------------------------------------------

FitReport fit(const GroupSpectrum& spectrum, const FitOptions& opt) {
  auto kept = spectrum.without_singletons();
  if (kept.total() == 0) throw Error("empty spectrum");
  ScaleLikelihood like(kept);
  if (like.distinct() < 2) throw UnderdeterminedError("spectrum has a single group size");
  if (opt.fixed_n_bar && !(*opt.fixed_n_bar > 1)) throw DomainError("fixed n_bar must exceed 1");

  const double total = like.total();
  std::function<double(double)> objective_of_scale;
  if (opt.least_squares) {
    objective_of_scale = [&](double s) {
      int n_max = std::max({support_limit(ModelParams{s, 2.0}), like.max_n(), 3});
      auto model = pmf(ModelParams{s, 2.0}, n_max);
      double sse = 0;
      for (int n = 2; n <= n_max; ++n) {
        auto it = kept.counts.find(n);
        double f = it == kept.counts.end() ? 0.0 : static_cast<double>(it->second) / total;
        sse += (f - model.at(n)) * (f - model.at(n));
      }
      return -sse;
    };
  } else {
    objective_of_scale = [&](double s) { return like(s); };
  }

  const double n_lo = opt.fixed_n_bar ? *opt.fixed_n_bar : opt.n_bar_lo;
  const double n_hi = opt.fixed_n_bar ? *opt.fixed_n_bar : opt.n_bar_hi;
  const int beta_cells = static_cast<int>(std::floor((opt.beta_hi - opt.beta_lo) / opt.beta_step + 1e-9)) + 1;
  const int nbar_cells =
      opt.fixed_n_bar ? 1 : static_cast<int>(std::floor((opt.n_bar_hi - opt.n_bar_lo) / opt.n_bar_step + 1e-9)) + 1;

  // Grid: lowest beta, then lowest n_bar, wins exact ties.
  double best = -std::numeric_limits<double>::infinity();
  ModelParams p{opt.beta_lo, n_lo};
  for (int bi = 0; bi < beta_cells; ++bi) {
    double beta = opt.beta_lo + bi * opt.beta_step;
    for (int ni = 0; ni < nbar_cells; ++ni) {
      double n_bar = opt.fixed_n_bar ? *opt.fixed_n_bar : opt.n_bar_lo + ni * opt.n_bar_step;
      double v = objective_of_scale(2.0 * beta / n_bar);
      if (v > best) {
        best = v;
        p = {beta, n_bar};
      }
    }
  }

  // Coordinate refinement inside one grid cell around the winner.
  auto obj = [&](double beta, double n_bar) { return objective_of_scale(2.0 * beta / n_bar); };
  const double line_tol = opt.tolerance * 1e-2;
  for (int iter = 0; iter < 200; ++iter) {
    double b_lo = std::max(opt.beta_lo, p.beta - opt.beta_step), b_hi = std::min(opt.beta_hi, p.beta + opt.beta_step);
    double nb = golden_max([&](double b) { return obj(b, p.n_bar); }, b_lo, b_hi, line_tol);
    double moved_b = std::abs(nb - p.beta);
    if (obj(nb, p.n_bar) >= obj(p.beta, p.n_bar)) p.beta = nb;
    double moved_n = 0;
    if (!opt.fixed_n_bar) {
      double n_lo2 = std::max(opt.n_bar_lo, p.n_bar - opt.n_bar_step);
      double n_hi2 = std::min(opt.n_bar_hi, p.n_bar + opt.n_bar_step);
      double nn = golden_max([&](double n) { return obj(p.beta, n); }, n_lo2, n_hi2, line_tol);
      moved_n = std::abs(nn - p.n_bar);
      if (obj(p.beta, nn) >= obj(p.beta, p.n_bar)) p.n_bar = nn;
    }
    if (moved_b < opt.tolerance && moved_n < opt.tolerance) break;
  }

  FitReport r;
  r.params = p;
  r.joint = !opt.fixed_n_bar;
  r.method = opt.least_squares ? "least-squares" : "ml";
  r.scale = p.scale();
  r.objective = objective_of_scale(r.scale);
  r.log_likelihood = like(r.scale);
  r.total = static_cast<std::int64_t>(total);
  r.excluded_singletons = spectrum.total() - kept.total();
  r.low_confidence = total < 100;
  r.n_max = std::max({support_limit(p), like.max_n(), 3});
  auto model = pmf(p, r.n_max);
  r.z = model.z;

  // Profile-likelihood intervals: log-likelihood within 1 of its maximum.
  const double s_lo = 2.0 * opt.beta_lo / n_hi, s_hi = 2.0 * opt.beta_hi / n_lo;
  std::function<double(double)> like_fn = [&](double s) { return like(s); };
  const double s_ml = opt.least_squares ? golden_max(like_fn, s_lo, s_hi, 1e-10) : r.scale;
  const double threshold = like(s_ml) - 1.0;
  r.scale_interval = level_interval(like_fn, s_ml, s_lo, s_hi, threshold, s_ml * 0.01);
  auto profile_beta = [&](double beta) {
    return like(std::clamp(s_ml, 2.0 * beta / n_hi, 2.0 * beta / n_lo));
  };
  r.beta_interval = level_interval(profile_beta, p.beta, opt.beta_lo, opt.beta_hi, threshold, opt.beta_step);
  if (opt.fixed_n_bar) {
    r.n_bar_interval = {*opt.fixed_n_bar, *opt.fixed_n_bar, true, true};
  } else {
    auto profile_nbar = [&](double n_bar) {
      return like(std::clamp(s_ml, 2.0 * opt.beta_lo / n_bar, 2.0 * opt.beta_hi / n_bar));
    };
    r.n_bar_interval = level_interval(profile_nbar, p.n_bar, opt.n_bar_lo, opt.n_bar_hi, threshold, opt.n_bar_step);
  }

  auto chi = chi_square(kept, model, total);
  r.chi_square = chi.statistic;
  r.chi_square_bins = chi.bins;
  r.chi_square_dof = chi.bins - 2;  // one identifiable parameter
  r.chi_square_p = std::numeric_limits<double>::quiet_NaN();
  if (r.chi_square_dof >= 1) {
    boost::math::chi_squared dist(r.chi_square_dof);
    r.chi_square_p = boost::math::cdf(boost::math::complement(dist, r.chi_square));
  }
  return r;
}

double fit_scale(const GroupSpectrum& spectrum) {
  auto kept = spectrum.without_singletons();
  if (kept.total() == 0) throw Error("empty spectrum");
  ScaleLikelihood like(kept);
  if (like.distinct() < 2) throw UnderdeterminedError("spectrum has a single group size");
  // bracket on a log grid, then golden section
  double best_s = 1e-3, best = like(best_s);
  for (double s = 1e-3; s <= 20.0; s *= 1.05) {
    double v = like(s);
    if (v > best) {
      best = v;
      best_s = s;
    }
  }
  return golden_max([&](double s) { return like(s); }, best_s / 1.05, best_s * 1.05, 1e-12);
}

// --- predictions ----------------------------------------------------------------------

MeanGroupSize mean_group_size(const ModelParams& p) {
  p.validate();
  return {1.0 + 3.0 * p.n_bar / (4.0 * p.beta), pmf(p).mean()};
}

double fission_ratio(const ModelParams& p) {
  p.validate();
  return 2.0 * p.beta;
}

std::vector<double> dunbar_series(double beta, double seed, int levels) {
  if (!(beta > 0)) throw DomainError("beta must be positive");
  if (!(seed > 1)) throw DomainError("seed must exceed 1");
  if (levels < 1) throw DomainError("levels must be at least 1");
  std::vector<double> series{seed};
  double scale = seed;
  for (int k = 1; k < levels; ++k) {
    double ratio = scale / continuous_mode(ModelParams{beta, scale});
    // Fission examples (550 -> 150, 15 -> 5) suggest ratios near 3-3.7,
    // above the 2*beta fission rate; this generator follows peak/mode.
    if (!(ratio > 1)) throw DomainError("non-convergent: peak-to-mode ratio <= 1 at scale " + std::to_string(scale));
    scale *= ratio;
    series.push_back(scale);
  }
  return series;
}

}  // namespace editdyn
