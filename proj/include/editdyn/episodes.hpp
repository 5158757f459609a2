#pragma once

// Burst segmentation of a page timeline into episodes and the per-episode
// group statistics built on top of them.

#include <cstdint>
#include <optional>
#include <vector>

#include "editdyn/ingest.hpp"

namespace editdyn {

// Inclusive index interval [first, last] into PageHistory::revisions.
struct RevisionRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const { return last - first + 1; }
  bool contains(std::size_t i) const { return i >= first && i <= last; }
  bool operator==(const RevisionRange&) const = default;
};

struct Episode {
  std::int64_t page_id = 0;
  Timestamp start_ts = 0;
  Timestamp end_ts = 0;
  RevisionRange revision_range;
  int n_users = 0;        // distinct actors, bots included
  int n_users_human = 0;  // distinct actors, bots excluded
  double duration_days = 0.0;
  int contention_count = 0;
  std::int64_t work_chars = 0;
  // work_chars fell back to |size_delta| for at least one revision.
  bool work_from_sizes = false;
  // Alternating reverts between the same pair of users.
  bool duel = false;

  bool bot_only() const { return n_users_human == 0; }
  int group_size(bool include_bots) const { return include_bots ? n_users : n_users_human; }
  bool operator==(const Episode&) const = default;
};

struct GapPolicy {
  enum class Mode { Absolute, Adaptive };
  Mode mode = Mode::Adaptive;
  double absolute_gap_s = 48.0 * 3600.0;
  double adaptive_multiplier = 10.0;

  static GapPolicy absolute(double gap_s) { return {Mode::Absolute, gap_s, 10.0}; }
  static GapPolicy adaptive(double multiplier, double floor_s) { return {Mode::Adaptive, floor_s, multiplier}; }
  void validate() const;
};

// Threshold in seconds the policy yields on this page.
double gap_threshold(const PageHistory& history, const GapPolicy& policy);

// Splits wherever the gap between consecutive revisions exceeds the threshold.
// Fills group sizes and work; contention is left at zero.
std::vector<Episode> segment_episodes(const PageHistory& history, const GapPolicy& policy = {});

int episode_group_size(const Episode& e, const PageHistory& history, bool include_bots);

struct PageEpisodes {
  const PageHistory* history = nullptr;
  std::vector<Episode> episodes;
};

struct LengthBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t episodes = 0;
  std::optional<double> mean_n;    // empty bin has no mean
  std::optional<double> stderr_n;  // needs at least one episode; 0 for one
};

// Log-spaced bins over article length; empty bins are kept.
std::vector<LengthBin> mean_group_size_vs_length(const std::vector<PageEpisodes>& corpus, int bins,
                                                 bool include_bots = true);

struct DurationRow {
  int n = 0;
  std::size_t episodes = 0;
  double mean_days = 0.0;
  double variance_days = 0.0;           // population variance
  double mean_days_per_user = 0.0;      // duration / N
};

struct DurationClusters {
  // Geometric centers (exp of mean log-duration) of the short and long band.
  double short_center_days = 0.0;
  double long_center_days = 0.0;
  std::size_t short_count = 0;
  std::size_t long_count = 0;
  double split_days = 0.0;  // boundary between the bands
  bool separated = false;   // false when fewer than two distinct durations
};

struct DurationTable {
  std::vector<DurationRow> rows;  // ascending N
  DurationClusters clusters;
};

DurationTable duration_vs_n(const std::vector<Episode>& episodes, bool include_bots = true);

// Exact 1-D two-means on log(max(days, 1 s)).
DurationClusters two_means_log_duration(std::vector<double> durations_days);

}  // namespace editdyn
