#include <doctest.h>

#include <algorithm>
#include <random>

#include "editdyn/contention.hpp"
#include "editdyn/error.hpp"
#include "support.hpp"

using namespace editdyn;

namespace {

struct Edit {
  std::string user;
  std::string hash;
  std::string comment = "";
  std::set<std::string> tags = {};
};

PageHistory history(const std::vector<Edit>& edits) {
  PageHistory h;
  h.page_id = 1;
  for (std::size_t i = 0; i < edits.size(); ++i) {
    Revision r;
    r.rev_id = static_cast<std::int64_t>(100 + i);
    r.timestamp = static_cast<Timestamp>(60 * i);
    r.user_key = edits[i].user;
    r.content_hash = edits[i].hash;
    r.comment = edits[i].comment;
    r.tags = edits[i].tags;
    r.byte_size = 10;
    r.size_delta = i ? 0 : 10;
    h.revisions.push_back(r);
  }
  return h;
}

PageHistory fixture(const std::string& name) {
  return parse_history(testsupport::slurp(testsupport::fixtures() / "cases" / name), HistoryFormat::FixtureCsv);
}

Episode whole(const PageHistory& h) {
  Episode e;
  e.revision_range = {0, h.revisions.size() - 1};
  return e;
}

Episode sized(int n, int contention) {
  Episode e;
  e.n_users = e.n_users_human = n;
  e.contention_count = contention;
  return e;
}

}  // namespace

TEST_SUITE("contention") {
  TEST_CASE("distinct hashes and no markers: nothing undone") {
    auto h = history({{"A", "h1", "add"}, {"B", "h2", "expand"}, {"C", "h3", "revision history cleanup"}});
    CHECK(detect_reverts(h).empty());
    CHECK(detect_reverts(PageHistory{}).empty());
  }

  TEST_CASE("A(h1) B(h2) A(h1) is one hash-identity revert of B") {
    auto h = fixture("aba.csv");
    auto events = detect_reverts(h);
    REQUIRE(events.size() == 1);
    const auto& ev = events[0];
    CHECK(ev.kind == RevertEvent::Kind::HashIdentity);
    CHECK(ev.reverting_rev == 3);
    CHECK(ev.restored_rev == std::optional<std::int64_t>(1));
    CHECK(ev.undone_revs == std::set<std::int64_t>{2});
    CHECK(ev.undone_users == std::set<std::string>{"B"});
    CHECK(ev.contentious());
    auto e = whole(h);
    CHECK(count_contention(e, events) == 1);
    CHECK(e.contention_count == 1);
  }

  TEST_CASE("self-revert is detected but not counted") {
    auto h = fixture("self_revert.csv");
    auto events = detect_reverts(h);
    REQUIRE(events.size() == 1);
    CHECK_FALSE(events[0].contentious());
    auto e = whole(h);
    CHECK(count_contention(e, events) == 0);
  }

  TEST_CASE("comment naming a revision undoes that revision") {
    auto h = fixture("undid.csv");
    auto events = detect_reverts(h);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == RevertEvent::Kind::CommentMarker);
    CHECK(events[0].undone_revs == std::set<std::int64_t>{12345});
    CHECK(events[0].restored_rev == std::optional<std::int64_t>(12344));
    CHECK(events[0].undone_users == std::set<std::string>{"A"});
  }

  TEST_CASE("marker without a revision reference undoes the previous edit") {
    auto h = history({{"A", "h1"}, {"B", "h2"}, {"C", "h3", "RV: spam"}});
    auto events = detect_reverts(h);
    REQUIRE(events.size() == 1);
    CHECK(events[0].undone_revs == std::set<std::int64_t>{101});
    CHECK(events[0].restored_rev == std::optional<std::int64_t>(100));
    // word boundaries: "revision" and "rvalue" are not markers
    CHECK(detect_reverts(history({{"A", "h1"}, {"B", "h2", "rvalue fix; revisions"}})).empty());
  }

  TEST_CASE("rollback undoes the whole run of the previous user") {
    auto h = history({{"A", "h1"}, {"V", "h2"}, {"V", "h3"}, {"V", "h4"}, {"R", "h5", "", {"mw-rollback"}}});
    auto events = detect_reverts(h);
    REQUIRE(events.size() == 1);
    CHECK(events[0].kind == RevertEvent::Kind::TagMarker);
    CHECK(events[0].undone_revs == std::set<std::int64_t>{101, 102, 103});
    CHECK(events[0].restored_rev == std::optional<std::int64_t>(100));
    auto by_comment = history({{"A", "h1"}, {"V", "h2"}, {"V", "h3"}, {"R", "h5", "Reverted edits by V to last version by A"}});
    CHECK(detect_reverts(by_comment)[0].undone_revs == std::set<std::int64_t>{101, 102});
  }

  TEST_CASE("hash identity wins over markers and points at the latest match") {
    auto h = history({{"A", "h1"}, {"B", "h2"}, {"A", "h1"}, {"C", "h3"}, {"D", "h1", "undo", {"mw-undo"}}});
    auto events = detect_reverts(h);
    REQUIRE(events.size() == 2);
    CHECK(events[1].kind == RevertEvent::Kind::HashIdentity);
    CHECK(events[1].restored_rev == std::optional<std::int64_t>(102));
    CHECK(events[1].undone_revs == std::set<std::int64_t>{103});
    for (const auto& ev : events) {
      auto idx = [&](std::int64_t id) { return static_cast<std::size_t>(id - 100); };
      CHECK(h.revisions[idx(*ev.restored_rev)].content_hash == h.revisions[ev.reverting_index].content_hash);
    }
  }

  TEST_CASE("null edit repeating the previous hash is not a revert") {
    CHECK(detect_reverts(history({{"A", "h1"}, {"B", "h1"}})).empty());
  }

  TEST_CASE("events are sorted by reverting_rev") {
    auto h = history({{"A", "h1"}, {"B", "h2"}, {"A", "h1"}, {"B", "h2"}, {"A", "h1"}});
    auto events = detect_reverts(h);
    REQUIRE(events.size() == 3);
    CHECK(std::is_sorted(events.begin(), events.end(),
                         [](const auto& a, const auto& b) { return a.reverting_rev < b.reverting_rev; }));
  }

  TEST_CASE("alternating reverts between a pair flag a duel") {
    auto h = history({{"A", "h1"}, {"B", "h2"}, {"A", "h1"}, {"B", "h2"}});
    auto events = detect_reverts(h);
    auto e = whole(h);
    CHECK(count_contention(e, events) == 2);
    CHECK(e.duel);
    auto one_way = history({{"A", "h1"}, {"B", "h2"}, {"A", "h1"}, {"C", "h3"}, {"A", "h1"}});
    auto e2 = whole(one_way);
    count_contention(e2, detect_reverts(one_way));
    CHECK_FALSE(e2.duel);
  }

  TEST_CASE("events outside the episode do not count") {
    auto h = fixture("aba.csv");
    auto events = detect_reverts(h);
    Episode e;
    e.revision_range = {0, 1};
    CHECK(count_contention(e, events) == 0);
    CHECK(count_contention(e, {}) == 0);
  }

  TEST_CASE("custom comment words") {
    RevertMarkers m;
    m.comment_words.push_back("terugdraaien");
    auto h = history({{"A", "h1"}, {"B", "h2"}, {"C", "h3", "Terugdraaien van B"}});
    CHECK(detect_reverts(h).empty());
    CHECK(detect_reverts(h, m).size() == 1);
  }

  TEST_CASE("all-zero contention has no peak") {
    auto curve = contention_curve({sized(2, 0), sized(3, 0), sized(3, 0)});
    CHECK_FALSE(curve.has_peak());
    CHECK_FALSE(curve.peak_weighted.has_value());
    for (const auto& r : curve.rows) CHECK(r.mean == 0.0);
  }

  TEST_CASE("hand-set curve peaks at 8") {
    std::vector<Episode> eps{sized(2, 1), sized(4, 3), sized(8, 7), sized(12, 2)};
    auto curve = contention_curve(eps);
    CHECK(curve.peak_argmax == std::optional<int>(8));
    CHECK(*curve.peak_weighted == doctest::Approx((2.0 * 1 + 4 * 3 + 8 * 7 + 12 * 2) / 13.0));
  }

  TEST_CASE("single size class: both estimators agree") {
    auto curve = contention_curve({sized(5, 1), sized(5, 3)});
    CHECK(curve.peak_argmax == std::optional<int>(5));
    CHECK(*curve.peak_weighted == doctest::Approx(5.0));
    REQUIRE(curve.rows.size() == 1);
    CHECK(curve.rows[0].mean == 2.0);
    CHECK(curve.rows[0].std_error == doctest::Approx(1.0));
  }

  TEST_CASE("curve needs a group of two") {
    CHECK_THROWS_AS(contention_curve({sized(1, 0)}), DomainError);
    CHECK_THROWS_AS(contention_curve({}), DomainError);
  }

  TEST_CASE("curve rows ignore episode order and zero episodes never raise I(N)") {
    std::mt19937_64 rng(7);
    std::vector<Episode> eps;
    for (int i = 0; i < 200; ++i)
      eps.push_back(sized(1 + static_cast<int>(rng() % 12), static_cast<int>(rng() % 5)));
    auto base = contention_curve(eps);
    auto shuffled = eps;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto again = contention_curve(shuffled);
    REQUIRE(base.rows.size() == again.rows.size());
    for (std::size_t i = 0; i < base.rows.size(); ++i) {
      CHECK(base.rows[i].n == again.rows[i].n);
      CHECK(base.rows[i].total == again.rows[i].total);
      CHECK(base.rows[i].mean == doctest::Approx(again.rows[i].mean));
    }
    for (int n = 1; n <= 12; ++n) {
      auto more = eps;
      more.push_back(sized(n, 0));
      auto c = contention_curve(more);
      for (const auto& r : c.rows)
        for (const auto& b : base.rows)
          if (b.n == r.n) CHECK(r.mean <= b.mean + 1e-12);
    }
  }

  TEST_CASE("bot exclusion changes the grouping") {
    Episode e;
    e.n_users = 3;
    e.n_users_human = 2;
    e.contention_count = 1;
    CHECK(contention_curve({e}, true).rows[0].n == 3);
    CHECK(contention_curve({e}, false).rows[0].n == 2);
  }

  TEST_CASE("kind names") {
    CHECK(to_string(RevertEvent::Kind::HashIdentity) == "hash-identity");
    CHECK(to_string(RevertEvent::Kind::TagMarker) == "tag-marker");
    CHECK(to_string(RevertEvent::Kind::CommentMarker) == "comment-marker");
  }
}
