#include <doctest.h>

#include "editdyn/error.hpp"
#include "editdyn/ngram.hpp"

using namespace editdyn;

TEST_SUITE("ngram") {
  TEST_CASE("uniform window arithmetic") {
    auto s = ngram_spectrum("aaaa", 2);
    CHECK(s.total == 3);
    CHECK(s.counts == std::map<std::string, std::int64_t>{{"aa", 3}});
    CHECK(s.relative("aa") == 1.0);
  }

  TEST_CASE("abab bigrams") {
    auto s = ngram_spectrum("abab", 2);
    CHECK(s.counts == std::map<std::string, std::int64_t>{{"ab", 2}, {"ba", 1}});
    CHECK(s.relative("ab") == doctest::Approx(2.0 / 3));
    CHECK(s.relative("ba") == doctest::Approx(1.0 / 3));
    CHECK(s.relative("zz") == 0.0);
  }

  TEST_CASE("text shorter than n is empty") {
    auto s = ngram_spectrum("a", 3);
    CHECK(s.total == 0);
    CHECK(s.counts.empty());
    CHECK(s.relative_map().empty());
    CHECK_THROWS_AS(ngram_spectrum("abc", 0), DomainError);
  }

  TEST_CASE("normalization folds case and collapses whitespace") {
    CHECK(encode_utf8(normalize_symbols("  Hello \t\n  WORLD  ")) == "hello world");
    CHECK(encode_utf8(normalize_symbols("ÄÖÜ Σίσυφος ДОМ")) == "äöü σίσυφος дом");
    auto s = ngram_spectrum("AB  ab", 2);
    CHECK(s.counts.at("ab") == 2);
    CHECK(s.counts.at("b ") == 1);
    CHECK(s.counts.at(" a") == 1);
  }

  TEST_CASE("grams count symbols, not bytes") {
    auto s = ngram_spectrum("日本語の", 2);
    CHECK(s.total == 3);
    CHECK(s.counts.count("日本"));
    CHECK(decode_utf8("日本").size() == 2);
    for (const auto& [g, c] : s.counts) CHECK(decode_utf8(g).size() == 2);
  }

  TEST_CASE("invalid utf-8 becomes replacement characters") {
    auto cps = decode_utf8(std::string("a\xff" "b"));
    REQUIRE(cps.size() == 3);
    CHECK(cps[1] == 0xFFFD);
    CHECK(encode_utf8(U"\U0001F600") == "\xF0\x9F\x98\x80");
  }

  TEST_CASE("relative frequencies sum to one") {
    auto s = ngram_spectrum("the quick brown fox jumps over the lazy dog", 3);
    double sum = 0;
    for (const auto& [g, r] : s.relative_map()) sum += r;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("merge pools counts") {
    auto m = merge_spectra({ngram_spectrum("abab", 2), ngram_spectrum("bcb", 2)});
    CHECK(m.total == 5);
    CHECK(m.counts.at("ab") == 2);
    CHECK(m.counts.at("bc") == 1);
    CHECK_THROWS_AS(merge_spectra({ngram_spectrum("ab", 2), ngram_spectrum("abc", 3)}), DomainError);
    CHECK(merge_spectra({}).total == 0);
  }

  TEST_CASE("rare page gram ranks first") {
    NgramSpectrum page{2, {{"qx", 50}, {"th", 50}}, 100};
    NgramSpectrum bg{2, {{"qx", 1}, {"th", 499}, {"he", 500}}, 1000};
    auto top = significant_grams(page, bg, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].gram == "qx");
    CHECK(top[0].ratio > top[1].ratio);
  }

  TEST_CASE("equal-frequency ties break lexicographically") {
    NgramSpectrum uniform{2, {{"cd", 1}, {"ab", 1}, {"bc", 1}}, 3};
    auto top = significant_grams(uniform, uniform, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].gram == "ab");
    CHECK(top[1].gram == "bc");
    CHECK(top[0].ratio == doctest::Approx(top[1].ratio));
  }

  TEST_CASE("k beyond the vocabulary returns everything") {
    auto s = ngram_spectrum("abcabc", 2);
    CHECK(significant_grams(s, s, 100).size() == s.counts.size());
    CHECK(significant_grams(s, s, 0).empty());
  }

  TEST_CASE("empty background ranks by raw frequency") {
    auto s = ngram_spectrum("abab", 2);
    auto top = significant_grams(s, NgramSpectrum{2, {}, 0}, 5);
    REQUIRE(top.size() == 2);
    CHECK(top[0].gram == "ab");
    CHECK(top[0].ratio == doctest::Approx(2.0 / 3));
  }

  TEST_CASE("mismatched n is rejected") {
    CHECK_THROWS_AS(significant_grams(ngram_spectrum("abc", 2), ngram_spectrum("abc", 3), 1), DomainError);
  }

  TEST_CASE("work measure examples") {
    CHECK(work_measure(std::nullopt, "abc") == 3);
    CHECK(work_measure(std::string("abc"), "abc") == 0);
    CHECK(work_measure(std::string("the cat"), "the black cat") == 5);
    CHECK(work_measure(std::string("the black cat"), "the cat") == 5);
    CHECK(work_measure(std::nullopt, "a1 b2 ??") == 2);
    CHECK(work_measure(std::string("x = 1\ny = 2\n"), "x = 1\ny = 3\n") == 0);
    CHECK(work_measure(std::string("line one\nline two\n"), "line one\nline 2\nline three\n") == 10);
  }

  TEST_CASE("alphabetic classification") {
    CHECK(is_alphabetic(U'a'));
    CHECK(is_alphabetic(U'Z'));
    CHECK(is_alphabetic(U'é'));
    CHECK(is_alphabetic(U'Ж'));
    CHECK(is_alphabetic(U'字'));
    CHECK_FALSE(is_alphabetic(U'1'));
    CHECK_FALSE(is_alphabetic(U' '));
    CHECK_FALSE(is_alphabetic(U'-'));
  }
}
