#include <doctest.h>

#include "editdyn/error.hpp"
#include "editdyn/ingest.hpp"
#include "support.hpp"

using namespace editdyn;
using testsupport::fixtures;
using testsupport::slurp;

namespace {

PageHistory load(const std::string& name, HistoryFormat f) {
  return parse_history(slurp(fixtures() / "formats" / name), f);
}

std::string csv_page(const std::string& rows) {
  return "# page_id=9\n# title=T\n" + std::string(kFixtureCsvHeader) + "\n" + rows;
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("the twelve-revision page parses identically from every format") {
    auto csv = load("page12.csv", HistoryFormat::FixtureCsv);
    auto json = load("page12.json", HistoryFormat::ApiJson);
    auto xml = load("page12.xml", HistoryFormat::DumpXml);
    REQUIRE(csv.revisions.size() == 12);
    CHECK(csv == json);
    CHECK(csv == xml);
    CHECK(csv.page_id == 777);
    CHECK(csv.title == "Twelve revisions");
    CHECK(csv.article_length == 1390);
    CHECK(csv.revisions.front().size_delta == csv.revisions.front().byte_size);
    CHECK_FALSE(csv.revisions.front().parent_id.has_value());
  }

  TEST_CASE("canonical order is (timestamp, rev_id) and strictly increasing") {
    auto h = load("page12.csv", HistoryFormat::FixtureCsv);
    for (std::size_t i = 1; i < h.revisions.size(); ++i) {
      const auto& a = h.revisions[i - 1];
      const auto& b = h.revisions[i];
      CHECK((a.timestamp < b.timestamp || (a.timestamp == b.timestamp && a.rev_id < b.rev_id)));
    }
    // two revisions share a timestamp; the lower id comes first
    CHECK(h.revisions[6].timestamp == h.revisions[7].timestamp);
    CHECK(h.revisions[6].rev_id < h.revisions[7].rev_id);
  }

  TEST_CASE("bot flags and anonymous keys on the twelve-revision page") {
    auto h = load("page12.json", HistoryFormat::ApiJson);
    int bots = 0;
    for (const auto& r : h.revisions) bots += r.is_bot;
    CHECK(bots == 1);
    CHECK(h.revisions[5].user_key == "SineBot");
    CHECK(h.revisions[5].is_bot);
    CHECK(h.revisions[3].user_key == "203.0.113.9");
    CHECK_FALSE(h.revisions[3].is_bot);
  }

  TEST_CASE("parsing is idempotent") {
    auto raw = slurp(fixtures() / "formats" / "page12.xml");
    CHECK(parse_history(raw, HistoryFormat::DumpXml) == parse_history(raw, HistoryFormat::DumpXml));
  }

  TEST_CASE("rows out of timestamp order are re-sorted") {
    auto h = parse_history(csv_page("3,2,2020-01-01T02:00:00Z,A,h3,30,10,,,0\n"
                                    "1,,2020-01-01T00:00:00Z,A,h1,10,10,,,0\n"
                                    "2,1,2020-01-01T01:00:00Z,B,h2,20,10,,,0\n"),
                           HistoryFormat::FixtureCsv);
    REQUIRE(h.revisions.size() == 3);
    CHECK(h.revisions[0].rev_id == 1);
    CHECK(h.revisions[1].rev_id == 2);
    CHECK(h.revisions[2].rev_id == 3);
  }

  TEST_CASE("empty history is a parse error") {
    CHECK_THROWS_WITH_AS(parse_history(csv_page(""), HistoryFormat::FixtureCsv), doctest::Contains("empty history"),
                         ParseError);
    std::string json = R"({"query":{"pages":[{"pageid":1,"title":"E","revisions":[]}]}})";
    CHECK_THROWS_WITH_AS(parse_history(json, HistoryFormat::ApiJson), doctest::Contains("empty history"), ParseError);
  }

  TEST_CASE("api-json errors name the offending field") {
    std::string bad_ts =
        R"({"query":{"pages":[{"pageid":1,"title":"E","revisions":[{"revid":1,"user":"A","timestamp":"yesterday","size":3}]}]}})";
    try {
      parse_history(bad_ts, HistoryFormat::ApiJson);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.locus() == "$.query.pages[0].revisions[0].timestamp");
    }
    std::string no_size =
        R"({"query":{"pages":[{"pageid":1,"title":"E","revisions":[{"revid":1,"user":"A","timestamp":"2020-01-01T00:00:00Z"}]}]}})";
    CHECK_THROWS_WITH_AS(parse_history(no_size, HistoryFormat::ApiJson), doctest::Contains("revisions[0].size"),
                         ParseError);
    CHECK_THROWS_AS(parse_history("{not json", HistoryFormat::ApiJson), ParseError);
  }

  TEST_CASE("api-json missing page is not-found") {
    CHECK_THROWS_AS(load("missing.json", HistoryFormat::ApiJson), NotFoundError);
    CHECK_THROWS_AS(parse_history(R"({"error":{"code":"missingtitle","info":"x"}})", HistoryFormat::ApiJson),
                    NotFoundError);
  }

  TEST_CASE("fixture-csv schema violations carry a line locus") {
    CHECK_THROWS_AS(parse_history("rev_id,user\n1,A\n", HistoryFormat::FixtureCsv), ParseError);
    try {
      parse_history(csv_page("1,,2020-01-01T00:00:00Z,A,h1,ten,10,,,0\n"), HistoryFormat::FixtureCsv);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.locus()).find("line 4") != std::string::npos);
    }
  }

  TEST_CASE("duplicate rev_id and negative size are rejected") {
    CHECK_THROWS_AS(parse_history(csv_page("1,,2020-01-01T00:00:00Z,A,h1,10,10,,,0\n"
                                           "1,,2020-01-01T01:00:00Z,B,h2,20,10,,,0\n"),
                                  HistoryFormat::FixtureCsv),
                    ParseError);
    CHECK_THROWS_AS(parse_history(csv_page("1,,2020-01-01T00:00:00Z,A,h1,-5,-5,,,0\n"), HistoryFormat::FixtureCsv),
                    ParseError);
  }

  TEST_CASE("first revision delta must equal its size") {
    CHECK_THROWS_AS(parse_history(csv_page("1,,2020-01-01T00:00:00Z,A,h1,10,4,,,0\n"), HistoryFormat::FixtureCsv),
                    ParseError);
  }

  TEST_CASE("single-revision history") {
    auto h = parse_history(csv_page("1,,2020-01-01T00:00:00Z,A,h1,10,10,,,0\n"), HistoryFormat::FixtureCsv);
    CHECK(h.revisions.size() == 1);
    CHECK(h.article_length == 10);
  }

  TEST_CASE("fixture-csv round trip") {
    auto h = load("page12.json", HistoryFormat::ApiJson);
    CHECK(parse_history(write_fixture_csv(h), HistoryFormat::FixtureCsv) == h);
  }

  TEST_CASE("dump-xml with several pages") {
    std::string xml = R"(<mediawiki>
  <page><title>One</title><id>1</id>
    <revision><id>10</id><timestamp>2020-01-01T00:00:00Z</timestamp><contributor><username>A</username></contributor><text bytes="5">hello</text><sha1>abc</sha1></revision>
  </page>
  <page><title>Two</title><id>2</id>
    <revision><id>20</id><timestamp>2020-01-01T00:00:00Z</timestamp><contributor><ip>10.0.0.1</ip></contributor><text bytes="0" deleted="deleted" /><sha1 /></revision>
  </page>
</mediawiki>)";
    auto pages = parse_dump_pages(xml);
    REQUIRE(pages.size() == 2);
    CHECK(pages[0].revisions[0].text == std::optional<std::string>("hello"));
    CHECK_FALSE(pages[1].revisions[0].text.has_value());
    CHECK(pages[1].revisions[0].user_key == "10.0.0.1");
    CHECK(parse_history(xml, HistoryFormat::DumpXml).title == "One");
    CHECK_THROWS_AS(parse_history("<mediawiki><page>", HistoryFormat::DumpXml), ParseError);
  }

  TEST_CASE("classify_bot") {
    CHECK(classify_bot("ClueBot NG", {}));
    CHECK_FALSE(classify_bot("Alice", {}));
    CHECK(classify_bot("Alice", {"bot"}));
    CHECK(classify_bot("SineBot", {}));
    CHECK(classify_bot("AnomieBOT", {}));
    CHECK(classify_bot("Cydebot_II", {}));
    CHECK_FALSE(classify_bot("Abbott", {}));
    CHECK_FALSE(classify_bot("Robotics fan", {}));
    CHECK_FALSE(classify_bot("192.168.0.1", {}));
    CHECK_FALSE(classify_bot("2001:db8::1", {}));
    CHECK_FALSE(classify_bot("~2024-12345", {}));

    BotPolicy policy;
    policy.force_human.insert("talbot");
    policy.force_bot.insert("helperscript");
    CHECK_FALSE(classify_bot("Talbot", {}, policy));
    CHECK(classify_bot("HelperScript", {}, policy));
    CHECK(classify_bot("Talbot", {"bot"}, policy));
  }

  TEST_CASE("bot policy file") {
    testsupport::TempDir dir;
    auto path = dir.path / "bots.txt";
    std::ofstream(path) << "# overrides\nbot Helper Script\nhuman Talbot\n";
    auto p = BotPolicy::load(path);
    CHECK(p.force_bot.count("helper script"));
    CHECK(p.force_human.count("talbot"));
    std::ofstream(path) << "robot X\n";
    CHECK_THROWS_AS(BotPolicy::load(path), ParseError);
  }

  TEST_CASE("anonymous keys") {
    CHECK(is_anonymous("203.0.113.7"));
    CHECK(is_anonymous("2001:DB8:0:0:0:0:0:1"));
    CHECK(is_anonymous("~2025-31415-92"));
    CHECK_FALSE(is_anonymous("Alice"));
    CHECK_FALSE(is_anonymous("1.2.3"));
  }

  TEST_CASE("timestamps") {
    CHECK(parse_timestamp("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_timestamp("2001-01-15T12:00:00Z") == 979560000);
    CHECK(parse_timestamp("979560000") == 979560000);
    CHECK(format_timestamp(979560000) == "2001-01-15T12:00:00Z");
    CHECK(format_timestamp(-1) == "1969-12-31T23:59:59Z");
    CHECK_THROWS_AS(parse_timestamp("2001-02-30T00:00:00Z"), ParseError);
    CHECK_THROWS_AS(parse_timestamp("2001-01-15 12:00"), ParseError);
    CHECK_THROWS_AS(parse_timestamp(""), ParseError);
  }

  TEST_CASE("format detection") {
    CHECK(format_from_path("a/b.json") == HistoryFormat::ApiJson);
    CHECK(format_from_path("b.XML") == HistoryFormat::DumpXml);
    CHECK(format_from_path("b.csv") == HistoryFormat::FixtureCsv);
    CHECK_FALSE(format_from_path("b.txt").has_value());
    CHECK(to_string(HistoryFormat::DumpXml) == "dump-xml");
  }

  TEST_CASE("response cache") {
    testsupport::TempDir dir;
    ResponseCache cache(dir.path / "c");
    auto k1 = ResponseCache::key("http://x/api.php", "Cabbage", "");
    auto k2 = ResponseCache::key("http://x/api.php", "Cabbage", "rv|1");
    auto k3 = ResponseCache::key("http://y/api.php", "Cabbage", "");
    CHECK(k1.size() == 64);
    CHECK(k1 != k2);
    CHECK(k1 != k3);
    CHECK_FALSE(cache.get(k1).has_value());
    cache.put(k1, "{\"a\":1}");
    CHECK(cache.get(k1) == std::optional<std::string>("{\"a\":1}"));
    cache.put(k1, "{\"a\":2}");
    CHECK(cache.get(k1) == std::optional<std::string>("{\"a\":2}"));
  }
}
