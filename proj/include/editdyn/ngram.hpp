#pragma once

// Language-independent n-gram fragmentation and the alphabetic work measure.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace editdyn {

struct NgramSpectrum {
  int n = 0;
  std::map<std::string, std::int64_t> counts;  // UTF-8 gram -> occurrences
  std::int64_t total = 0;

  double relative(const std::string& gram) const;
  std::map<std::string, double> relative_map() const;
};

// Decode UTF-8 into code points; invalid bytes become U+FFFD.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

// Case folding and whitespace collapsing applied before fragmentation.
std::u32string normalize_symbols(std::string_view text);

NgramSpectrum ngram_spectrum(std::string_view text, int n);

// Pools spectra of the same n (a corpus background).
NgramSpectrum merge_spectra(const std::vector<NgramSpectrum>& spectra);

struct RankedGram {
  std::string gram;
  double ratio = 0.0;
};

// Top-k grams by relative(page) / (relative(background) + eps), eps = 1/(total+1).
std::vector<RankedGram> significant_grams(const NgramSpectrum& page, const NgramSpectrum& background,
                                          std::size_t k);

bool is_alphabetic(char32_t c);

// Alphabetic characters inserted plus deleted between two page texts.
std::int64_t work_measure(const std::optional<std::string>& parent_text, const std::string& new_text);

}  // namespace editdyn
