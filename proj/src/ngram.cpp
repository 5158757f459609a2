#include "editdyn/ngram.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include "editdyn/error.hpp"

namespace editdyn {

// --- UTF-8 ---------------------------------------------------------------------

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto b0 = static_cast<unsigned char>(s[i]);
    int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      auto b = static_cast<unsigned char>(s[i + k]);
      if ((b >> 6) != 0x2) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  for (char32_t c : text) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

// --- normalization -----------------------------------------------------------

namespace {

bool is_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

// Simple one-to-one lower-casing for Latin, Greek and Cyrillic.
char32_t fold(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c < 0xC0) return c;
  if (c <= 0xDE) return c == 0xD7 ? c : c + 32;
  if (c >= 0x100 && c <= 0x137) return c % 2 == 0 ? c + 1 : c;
  if (c >= 0x139 && c <= 0x148) return c % 2 == 1 ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return c % 2 == 0 ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return c % 2 == 1 ? c + 1 : c;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  return c;
}

}  // namespace

bool is_alphabetic(char32_t c) {
  if (c < 0x80) return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
  if (c == 0xAA || c == 0xB5 || c == 0xBA) return true;
  if (c >= 0xC0 && c <= 0x2AF) return c != 0xD7 && c != 0xF7;
  if (c >= 0x386 && c <= 0x3FF) return c != 0x387 && c != 0x3F6;
  if (c >= 0x400 && c <= 0x52F) return c < 0x482 || c > 0x489;
  if (c >= 0x531 && c <= 0x587) return c < 0x557 || c > 0x560;
  if (c >= 0x5D0 && c <= 0x5EA) return true;
  if ((c >= 0x620 && c <= 0x64A) || (c >= 0x671 && c <= 0x6D3)) return true;
  if (c >= 0x904 && c <= 0x939) return true;
  if (c >= 0xE01 && c <= 0xE30) return true;
  if (c >= 0x1E00 && c <= 0x1FFF) return true;
  if ((c >= 0x3041 && c <= 0x3096) || (c >= 0x30A1 && c <= 0x30FA)) return true;
  if ((c >= 0x3400 && c <= 0x4DBF) || (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0xF900 && c <= 0xFAFF)) return true;
  if (c >= 0xAC00 && c <= 0xD7A3) return true;
  return false;
}

std::u32string normalize_symbols(std::string_view text) {
  std::u32string out;
  bool pending_space = false;
  for (char32_t c : decode_utf8(text)) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(fold(c));
  }
  return out;
}

// --- spectra -------------------------------------------------------------------

double NgramSpectrum::relative(const std::string& gram) const {
  if (total == 0) return 0.0;
  auto it = counts.find(gram);
  return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

std::map<std::string, double> NgramSpectrum::relative_map() const {
  std::map<std::string, double> out;
  for (const auto& [g, c] : counts) out.emplace(g, static_cast<double>(c) / static_cast<double>(total));
  return out;
}

NgramSpectrum ngram_spectrum(std::string_view text, int n) {
  if (n < 1) throw DomainError("n must be at least 1");
  NgramSpectrum s;
  s.n = n;
  auto symbols = normalize_symbols(text);
  if (symbols.size() < static_cast<std::size_t>(n)) return s;
  std::u32string_view view(symbols);
  for (std::size_t i = 0; i + n <= symbols.size(); ++i) ++s.counts[encode_utf8(view.substr(i, n))];
  s.total = static_cast<std::int64_t>(symbols.size() - n + 1);
  return s;
}

NgramSpectrum merge_spectra(const std::vector<NgramSpectrum>& spectra) {
  NgramSpectrum out;
  for (const auto& s : spectra) {
    if (out.n == 0) out.n = s.n;
    if (s.n != out.n) throw DomainError("cannot merge spectra of different n");
    for (const auto& [g, c] : s.counts) out.counts[g] += c;
    out.total += s.total;
  }
  return out;
}

std::vector<RankedGram> significant_grams(const NgramSpectrum& page, const NgramSpectrum& background,
                                          std::size_t k) {
  if (background.total > 0 && background.n != page.n) throw DomainError("spectra must share n");
  std::vector<RankedGram> ranked;
  ranked.reserve(page.counts.size());
  const double eps = 1.0 / (static_cast<double>(background.total) + 1.0);
  for (const auto& [gram, count] : page.counts) {
    double rel = static_cast<double>(count) / static_cast<double>(page.total);
    double ratio = background.total > 0 ? rel / (background.relative(gram) + eps) : rel;
    ranked.push_back({gram, ratio});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedGram& a, const RankedGram& b) {
    return a.ratio != b.ratio ? a.ratio > b.ratio : a.gram < b.gram;
  });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

// --- work measure ----------------------------------------------------------------

namespace {

std::int64_t count_alpha(std::u32string_view s) {
  return std::count_if(s.begin(), s.end(), is_alphabetic);
}

// Bit-parallel LCS length (Allison-Dix / Hyyro).
std::int64_t lcs_length(const std::u32string& a0, const std::u32string& b0) {
  const auto& a = a0.size() <= b0.size() ? a0 : b0;
  const auto& b = a0.size() <= b0.size() ? b0 : a0;
  if (a.empty()) return 0;
  const std::size_t m = a.size(), words = (m + 63) / 64;
  std::unordered_map<char32_t, std::vector<std::uint64_t>> masks;
  for (std::size_t i = 0; i < m; ++i) {
    auto& mask = masks[a[i]];
    if (mask.empty()) mask.assign(words, 0);
    mask[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  std::vector<std::uint64_t> v(words, ~std::uint64_t{0});
  for (char32_t c : b) {
    auto it = masks.find(c);
    if (it == masks.end()) continue;
    const auto& mask = it->second;
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t u = v[w] & mask[w];
      std::uint64_t t = v[w] + u;
      std::uint64_t c1 = t < v[w];
      std::uint64_t s = t + carry;
      std::uint64_t c2 = s < t;
      carry = c1 | c2;
      v[w] = s | (v[w] & ~mask[w]);
    }
  }
  std::int64_t zeros = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (!((v[i / 64] >> (i % 64)) & 1)) ++zeros;
  return zeros;
}

std::vector<std::u32string> split_lines(const std::u32string& s) {
  std::vector<std::u32string> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == U'\n') {
      lines.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return lines;
}

std::u32string letters_of(const std::vector<std::u32string>& lines, std::size_t lo, std::size_t hi) {
  std::u32string out;
  for (std::size_t i = lo; i < hi; ++i)
    for (char32_t c : lines[i])
      if (is_alphabetic(c)) out.push_back(c);
  return out;
}

std::int64_t hunk_cost(const std::vector<std::u32string>& a, std::size_t a0, std::size_t a1,
                       const std::vector<std::u32string>& b, std::size_t b0, std::size_t b1) {
  auto da = letters_of(a, a0, a1), db = letters_of(b, b0, b1);
  return static_cast<std::int64_t>(da.size() + db.size()) - 2 * lcs_length(da, db);
}

// Line-level LCS alignment, then character LCS inside each unmatched hunk.
std::int64_t aligned_cost(const std::vector<std::u32string>& a, const std::vector<std::u32string>& b) {
  std::size_t lo = 0;
  while (lo < a.size() && lo < b.size() && a[lo] == b[lo]) ++lo;
  std::size_t ea = a.size(), eb = b.size();
  while (ea > lo && eb > lo && a[ea - 1] == b[eb - 1]) {
    --ea;
    --eb;
  }
  const std::size_t n = ea - lo, m = eb - lo;
  if (n == 0 || m == 0 || n * m > 4'000'000) return hunk_cost(a, lo, ea, b, lo, eb);

  std::unordered_map<std::u32string, int> ids;
  std::vector<int> ia(n), ib(m);
  for (std::size_t i = 0; i < n; ++i) ia[i] = ids.emplace(a[lo + i], static_cast<int>(ids.size())).first->second;
  for (std::size_t j = 0; j < m; ++j) ib[j] = ids.emplace(b[lo + j], static_cast<int>(ids.size())).first->second;

  std::vector<std::uint32_t> dp((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return dp[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      at(i, j) = ia[i] == ib[j] ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));

  std::int64_t cost = 0;
  std::size_t i = 0, j = 0, hi = 0, hj = 0;
  while (i < n && j < m) {
    if (ia[i] == ib[j]) {
      cost += hunk_cost(a, lo + hi, lo + i, b, lo + hj, lo + j);
      ++i;
      ++j;
      hi = i;
      hj = j;
    } else if (at(i + 1, j) >= at(i, j + 1)) {
      ++i;
    } else {
      ++j;
    }
  }
  cost += hunk_cost(a, lo + hi, ea, b, lo + hj, eb);
  return cost;
}

}  // namespace

std::int64_t work_measure(const std::optional<std::string>& parent_text, const std::string& new_text) {
  auto next = decode_utf8(new_text);
  if (!parent_text) return count_alpha(next);
  auto prev = decode_utf8(*parent_text);
  if (prev == next) return 0;
  auto a = split_lines(prev), b = split_lines(next);
  // The line alignment is not unique; take the cheaper orientation so the
  // measure does not depend on argument order.
  return std::min(aligned_cost(a, b), aligned_cost(b, a));
}

}  // namespace editdyn
