#include "editdyn/episodes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "editdyn/error.hpp"
#include "editdyn/ngram.hpp"

namespace editdyn {

void GapPolicy::validate() const {
  if (!(absolute_gap_s > 0)) throw DomainError("absolute_gap_s must be positive");
  if (mode == Mode::Adaptive && !(adaptive_multiplier > 1)) throw DomainError("adaptive_multiplier must exceed 1");
}

double gap_threshold(const PageHistory& h, const GapPolicy& policy) {
  policy.validate();
  if (policy.mode == GapPolicy::Mode::Absolute || h.revisions.size() < 2) return policy.absolute_gap_s;
  std::vector<double> gaps;
  gaps.reserve(h.revisions.size() - 1);
  for (std::size_t i = 1; i < h.revisions.size(); ++i)
    gaps.push_back(static_cast<double>(h.revisions[i].timestamp - h.revisions[i - 1].timestamp));
  std::sort(gaps.begin(), gaps.end());
  auto m = gaps.size();
  double median = m % 2 ? gaps[m / 2] : 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]);
  return std::max(policy.absolute_gap_s, policy.adaptive_multiplier * median);
}

namespace {

// Work of revision i: alphabetic diff against its parent text, or |size_delta|.
std::pair<std::int64_t, bool> revision_work(const PageHistory& h, std::size_t i,
                                            const std::unordered_map<std::int64_t, std::size_t>& index) {
  const auto& r = h.revisions[i];
  if (r.text) {
    if (!r.parent_id) return {work_measure(std::nullopt, *r.text), false};
    auto it = index.find(*r.parent_id);
    const Revision* parent = it != index.end() ? &h.revisions[it->second] : nullptr;
    if (parent && parent->text) return {work_measure(parent->text, *r.text), false};
  }
  return {std::llabs(r.size_delta), true};
}

}  // namespace

std::vector<Episode> segment_episodes(const PageHistory& h, const GapPolicy& policy) {
  if (h.revisions.empty()) throw DomainError("history must not be empty");
  const double threshold = gap_threshold(h, policy);

  std::unordered_map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < h.revisions.size(); ++i) index.emplace(h.revisions[i].rev_id, i);

  std::vector<Episode> out;
  std::size_t first = 0;
  auto close = [&](std::size_t last) {
    Episode e;
    e.page_id = h.page_id;
    e.revision_range = {first, last};
    e.start_ts = h.revisions[first].timestamp;
    e.end_ts = h.revisions[last].timestamp;
    e.duration_days = static_cast<double>(e.end_ts - e.start_ts) / 86400.0;
    e.n_users = episode_group_size(e, h, true);
    e.n_users_human = episode_group_size(e, h, false);
    for (std::size_t i = first; i <= last; ++i) {
      auto [w, fallback] = revision_work(h, i, index);
      e.work_chars += w;
      e.work_from_sizes = e.work_from_sizes || fallback;
    }
    out.push_back(e);
  };
  for (std::size_t i = 1; i < h.revisions.size(); ++i) {
    auto gap = static_cast<double>(h.revisions[i].timestamp - h.revisions[i - 1].timestamp);
    if (gap > threshold) {
      close(i - 1);
      first = i;
    }
  }
  close(h.revisions.size() - 1);
  return out;
}

int episode_group_size(const Episode& e, const PageHistory& h, bool include_bots) {
  if (e.revision_range.last >= h.revisions.size() || e.revision_range.first > e.revision_range.last)
    throw DomainError("episode range outside history");
  std::unordered_set<std::string> users;
  for (std::size_t i = e.revision_range.first; i <= e.revision_range.last; ++i) {
    const auto& r = h.revisions[i];
    if (include_bots || !r.is_bot) users.insert(r.user_key);
  }
  return static_cast<int>(users.size());
}

std::vector<LengthBin> mean_group_size_vs_length(const std::vector<PageEpisodes>& corpus, int bins,
                                                 bool include_bots) {
  if (bins < 1) throw DomainError("bins must be at least 1");
  std::vector<std::pair<double, int>> points;  // (article length, N)
  double lo = 0, hi = 0;
  bool any = false;
  for (const auto& page : corpus) {
    if (!page.history) continue;
    double length = std::max<double>(1.0, static_cast<double>(page.history->article_length));
    for (const auto& e : page.episodes) {
      int n = e.group_size(include_bots);
      if (n == 0) continue;
      points.emplace_back(length, n);
      lo = any ? std::min(lo, length) : length;
      hi = any ? std::max(hi, length) : length;
      any = true;
    }
  }
  if (!any) return {};

  const double log_lo = std::log(lo), log_hi = std::log(hi);
  const double width = (log_hi - log_lo) / bins;
  std::vector<LengthBin> table(static_cast<std::size_t>(bins));
  for (int k = 0; k < bins; ++k) {
    table[k].lo = k == 0 ? lo : std::exp(log_lo + width * k);
    table[k].hi = k == bins - 1 ? hi : std::exp(log_lo + width * (k + 1));
  }
  std::vector<std::vector<int>> members(static_cast<std::size_t>(bins));
  for (auto [length, n] : points) {
    int k = width > 0 ? static_cast<int>(std::floor((std::log(length) - log_lo) / width)) : 0;
    k = std::clamp(k, 0, bins - 1);
    members[k].push_back(n);
  }
  for (int k = 0; k < bins; ++k) {
    const auto& v = members[k];
    table[k].episodes = v.size();
    if (v.empty()) continue;
    double sum = 0;
    for (int n : v) sum += n;
    double mean = sum / static_cast<double>(v.size());
    double ss = 0;
    for (int n : v) ss += (n - mean) * (n - mean);
    table[k].mean_n = mean;
    table[k].stderr_n = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
  }
  return table;
}

DurationClusters two_means_log_duration(std::vector<double> days) {
  DurationClusters c;
  if (days.empty()) return c;
  std::vector<double> x;
  x.reserve(days.size());
  for (double d : days) x.push_back(std::log(std::max(d, 1.0 / 86400.0)));
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  std::vector<double> s(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s[i + 1] = s[i] + x[i];
    s2[i + 1] = s2[i] + x[i] * x[i];
  }
  auto sse = [&](std::size_t a, std::size_t b) {  // [a, b)
    double m = static_cast<double>(b - a);
    double sum = s[b] - s[a];
    return (s2[b] - s2[a]) - sum * sum / m;
  };
  std::size_t best = 0;
  double best_cost = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (x[k] == x[k - 1]) continue;
    double cost = sse(0, k) + sse(k, n);
    if (best == 0 || cost < best_cost) {
      best = k;
      best_cost = cost;
    }
  }
  if (best == 0) {
    c.short_center_days = c.long_center_days = std::exp(s[n] / static_cast<double>(n));
    c.short_count = n;
    c.split_days = std::exp(x.back());
    return c;
  }
  c.separated = true;
  c.short_center_days = std::exp(s[best] / static_cast<double>(best));
  c.long_center_days = std::exp((s[n] - s[best]) / static_cast<double>(n - best));
  c.short_count = best;
  c.long_count = n - best;
  c.split_days = std::exp(0.5 * (x[best - 1] + x[best]));
  return c;
}

DurationTable duration_vs_n(const std::vector<Episode>& episodes, bool include_bots) {
  std::map<int, std::vector<const Episode*>> groups;
  std::vector<double> all;
  for (const auto& e : episodes) {
    int n = e.group_size(include_bots);
    if (n == 0) continue;
    groups[n].push_back(&e);
    all.push_back(e.duration_days);
  }
  DurationTable t;
  for (const auto& [n, v] : groups) {
    DurationRow row;
    row.n = n;
    row.episodes = v.size();
    double sum = 0, per_user = 0;
    for (const auto* e : v) {
      sum += e->duration_days;
      per_user += e->duration_days / n;
    }
    row.mean_days = sum / static_cast<double>(v.size());
    row.mean_days_per_user = per_user / static_cast<double>(v.size());
    double ss = 0;
    for (const auto* e : v) ss += (e->duration_days - row.mean_days) * (e->duration_days - row.mean_days);
    row.variance_days = ss / static_cast<double>(v.size());
    t.rows.push_back(row);
  }
  t.clusters = two_means_log_duration(std::move(all));
  return t;
}

}  // namespace editdyn
