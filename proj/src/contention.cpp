#include "editdyn/contention.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "editdyn/error.hpp"

namespace editdyn {

std::string_view to_string(RevertEvent::Kind kind) {
  switch (kind) {
    case RevertEvent::Kind::HashIdentity: return "hash-identity";
    case RevertEvent::Kind::TagMarker: return "tag-marker";
    case RevertEvent::Kind::CommentMarker: return "comment-marker";
  }
  return "?";
}

std::regex RevertMarkers::comment_regex() const {
  std::string alternation;
  for (const auto& w : comment_words) {
    if (!alternation.empty()) alternation += '|';
    for (char c : w) {
      if (std::string_view("\\^$.|?*+()[]{}").find(c) != std::string_view::npos) alternation += '\\';
      alternation += c;
    }
  }
  return std::regex("\\b(" + alternation + ")\\b", std::regex::icase | std::regex::ECMAScript);
}

namespace {

const std::regex& revision_reference() {
  static const std::regex re("revision\\s+(\\d+)", std::regex::icase);
  return re;
}

const std::regex& rollback_comment() {
  static const std::regex re("reverted\\s+edits\\s+by", std::regex::icase);
  return re;
}

void fill_users(RevertEvent& ev, const PageHistory& h, const std::unordered_map<std::int64_t, std::size_t>& index) {
  ev.undone_users.clear();
  for (auto id : ev.undone_revs) ev.undone_users.insert(h.revisions[index.at(id)].user_key);
}

// Marker-based events carry no hash evidence; resolve what was undone from
// the comment, the rollback convention, or the immediately preceding edit.
RevertEvent resolve_marker_event(const PageHistory& h, std::size_t i, RevertEvent::Kind kind, bool rollback,
                                 const std::unordered_map<std::int64_t, std::size_t>& index) {
  const auto& r = h.revisions[i];
  RevertEvent ev;
  ev.kind = kind;
  ev.reverting_rev = r.rev_id;
  ev.reverting_index = i;
  ev.reverting_user = r.user_key;

  std::smatch m;
  if (std::regex_search(r.comment, m, revision_reference())) {
    std::int64_t ref = 0;
    try {
      ref = std::stoll(m[1].str());
    } catch (const std::exception&) {
      ref = 0;
    }
    if (auto it = index.find(ref); it != index.end() && it->second < i) {
      ev.undone_revs.insert(ref);
      if (it->second > 0) ev.restored_rev = h.revisions[it->second - 1].rev_id;
      fill_users(ev, h, index);
      return ev;
    }
  }
  std::size_t first = i - 1;
  if (rollback || std::regex_search(r.comment, rollback_comment())) {
    const auto& target = h.revisions[i - 1].user_key;
    while (first > 0 && h.revisions[first - 1].user_key == target) --first;
  }
  for (std::size_t k = first; k < i; ++k) ev.undone_revs.insert(h.revisions[k].rev_id);
  if (first > 0) ev.restored_rev = h.revisions[first - 1].rev_id;
  fill_users(ev, h, index);
  return ev;
}

}  // namespace

std::vector<RevertEvent> detect_reverts(const PageHistory& h, const RevertMarkers& markers) {
  std::vector<RevertEvent> events;
  if (h.revisions.size() < 2) return events;
  std::unordered_map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < h.revisions.size(); ++i) index.emplace(h.revisions[i].rev_id, i);
  const auto comment_re = markers.comment_regex();

  std::unordered_map<std::string, std::size_t> last_seen;
  for (std::size_t i = 0; i < h.revisions.size(); ++i) {
    const auto& r = h.revisions[i];
    std::optional<RevertEvent> ev;

    if (!r.content_hash.empty()) {
      auto it = last_seen.find(r.content_hash);
      if (it != last_seen.end() && it->second + 1 < i && h.revisions[i - 1].content_hash != r.content_hash) {
        RevertEvent e;
        e.kind = RevertEvent::Kind::HashIdentity;
        e.reverting_rev = r.rev_id;
        e.reverting_index = i;
        e.reverting_user = r.user_key;
        e.restored_rev = h.revisions[it->second].rev_id;
        for (std::size_t k = it->second + 1; k < i; ++k) e.undone_revs.insert(h.revisions[k].rev_id);
        fill_users(e, h, index);
        ev = std::move(e);
      }
      last_seen[r.content_hash] = i;
    }
    if (!ev && i > 0) {
      bool tagged = false, rollback = false;
      for (const auto& t : r.tags) {
        if (markers.tags.count(t)) {
          tagged = true;
          rollback = rollback || t.find("rollback") != std::string::npos;
        }
      }
      if (tagged) ev = resolve_marker_event(h, i, RevertEvent::Kind::TagMarker, rollback, index);
      else if (std::regex_search(r.comment, comment_re))
        ev = resolve_marker_event(h, i, RevertEvent::Kind::CommentMarker, false, index);
    }
    if (ev) events.push_back(std::move(*ev));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const auto& a, const auto& b) { return a.reverting_rev < b.reverting_rev; });
  return events;
}

bool has_duel(const Episode& e, const std::vector<RevertEvent>& events) {
  std::map<std::pair<std::string, std::string>, bool> direction;  // pair -> "lower name reverted"
  for (const auto& ev : events) {
    if (!e.revision_range.contains(ev.reverting_index) || !ev.contentious()) continue;
    for (const auto& victim : ev.undone_users) {
      bool lower_reverts = ev.reverting_user < victim;
      auto key = lower_reverts ? std::pair{ev.reverting_user, victim} : std::pair{victim, ev.reverting_user};
      auto [it, inserted] = direction.emplace(key, lower_reverts);
      if (!inserted && it->second != lower_reverts) return true;
      it->second = lower_reverts;
    }
  }
  return false;
}

int count_contention(Episode& e, const std::vector<RevertEvent>& events) {
  int count = 0;
  for (const auto& ev : events)
    if (e.revision_range.contains(ev.reverting_index) && ev.contentious()) ++count;
  e.contention_count = count;
  e.duel = has_duel(e, events);
  return count;
}

ContentionCurve contention_curve(const std::vector<Episode>& episodes, bool include_bots) {
  std::map<int, std::vector<int>> groups;
  bool any_group = false;
  for (const auto& e : episodes) {
    int n = e.group_size(include_bots);
    if (n == 0) continue;
    any_group = any_group || n >= 2;
    groups[n].push_back(e.contention_count);
  }
  if (!any_group) throw DomainError("contention curve needs an episode with at least two users");

  ContentionCurve curve;
  std::int64_t grand_total = 0;
  double weighted = 0;
  double best = 0;
  for (const auto& [n, v] : groups) {
    ContentionRow row;
    row.n = n;
    row.episodes = v.size();
    for (int c : v) row.total += c;
    row.mean = static_cast<double>(row.total) / static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0;
      for (int c : v) ss += (c - row.mean) * (c - row.mean);
      row.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    if (row.mean > best) {
      best = row.mean;
      curve.peak_argmax = n;
    }
    grand_total += row.total;
    weighted += static_cast<double>(n) * static_cast<double>(row.total);
    curve.rows.push_back(row);
  }
  if (grand_total > 0) curve.peak_weighted = weighted / static_cast<double>(grand_total);
  return curve;
}

}  // namespace editdyn
