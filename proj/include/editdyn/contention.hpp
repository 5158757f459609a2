#pragma once

// Revert detection and the contention-versus-group-size curve.

#include <cstdint>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "editdyn/episodes.hpp"
#include "editdyn/ingest.hpp"

namespace editdyn {

struct RevertEvent {
  enum class Kind { HashIdentity, TagMarker, CommentMarker };

  std::int64_t reverting_rev = 0;
  std::optional<std::int64_t> restored_rev;  // absent when the page creation was undone
  std::set<std::int64_t> undone_revs;
  std::string reverting_user;
  std::set<std::string> undone_users;
  Kind kind = Kind::HashIdentity;
  std::size_t reverting_index = 0;  // position in PageHistory::revisions

  // Counted as contention only when nobody reverts themselves.
  bool contentious() const { return !undone_users.empty() && !undone_users.count(reverting_user); }
  bool operator==(const RevertEvent&) const = default;
};

std::string_view to_string(RevertEvent::Kind kind);

struct RevertMarkers {
  std::set<std::string> tags{"mw-undo", "mw-rollback", "mw-manual-revert", "undo", "rollback"};
  std::vector<std::string> comment_words{"undid", "undo", "revert", "reverted", "rv", "rvv", "rollback"};

  std::regex comment_regex() const;
};

// Union of hash-identity, tag-marker and comment-marker detectors, one event
// per reverting revision, sorted by reverting_rev.
std::vector<RevertEvent> detect_reverts(const PageHistory& history, const RevertMarkers& markers = {});

// Contentious events whose reverting revision lies inside the episode. Also
// writes the count and duel flag back onto `e`.
int count_contention(Episode& e, const std::vector<RevertEvent>& events);

// True when the same pair reverts each other in alternation inside the episode.
bool has_duel(const Episode& e, const std::vector<RevertEvent>& events);

struct ContentionRow {
  int n = 0;
  std::size_t episodes = 0;
  double mean = 0.0;        // I(N)
  double std_error = 0.0;
  std::int64_t total = 0;   // summed contention
};

struct ContentionCurve {
  std::vector<ContentionRow> rows;   // ascending N
  std::optional<int> peak_argmax;    // empty: no contention anywhere
  std::optional<double> peak_weighted;

  bool has_peak() const { return peak_argmax.has_value(); }
};

// I(N) over episodes grouped by size. Requires an episode with N >= 2.
ContentionCurve contention_curve(const std::vector<Episode>& episodes, bool include_bots = true);

}  // namespace editdyn
