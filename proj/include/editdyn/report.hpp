#pragma once

// Corpus-level orchestration and the figure-ready tables written by the CLI.
// Every table starts with the schema line "# edit-dynamics v1".

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "editdyn/contention.hpp"
#include "editdyn/episodes.hpp"
#include "editdyn/ingest.hpp"
#include "editdyn/model.hpp"
#include "editdyn/montecarlo.hpp"
#include "editdyn/ngram.hpp"

namespace editdyn {

struct CorpusPage {
  PageHistory history;
  std::vector<Episode> episodes;  // contention counts filled
  std::vector<RevertEvent> reverts;
};

struct AnalysisOptions {
  GapPolicy gap;
  RevertMarkers markers;
  unsigned threads = 0;  // 0: hardware concurrency
};

// Segments and scores every page; order of the result follows the input.
std::vector<CorpusPage> analyze_corpus(std::vector<PageHistory> pages, const AnalysisOptions& options);

// *.csv, *.json and *.xml files under `dir`, sorted by name.
std::vector<std::filesystem::path> list_history_files(const std::filesystem::path& dir);
// Every page in one file; ParseError loci are prefixed with the file name.
std::vector<PageHistory> load_history_file(const std::filesystem::path& file, const BotPolicy& bots);
// All files of a directory in name order. Pages without an explicit id get
// their 1-based position, pages without a title the file stem.
std::vector<PageHistory> load_fixture_dir(const std::filesystem::path& dir, const BotPolicy& bots);

std::vector<Episode> all_episodes(const std::vector<CorpusPage>& corpus);
std::vector<PageEpisodes> page_episodes(const std::vector<CorpusPage>& corpus);
GroupSpectrum group_spectrum(const std::vector<Episode>& episodes, bool include_bots);
double bot_edit_fraction(const std::vector<CorpusPage>& corpus);

// --- tables ---------------------------------------------------------------------

std::string episodes_csv(const std::vector<CorpusPage>& corpus);
std::string reverts_csv(const std::vector<CorpusPage>& corpus);
std::string fig1_csv(const std::vector<LengthBin>& bins);
std::string fig2_csv(const DurationTable& table);
std::string fig3_csv(const ContentionCurve& curve);
std::string spectrum_csv(const GroupSpectrum& s);  // N,count,frequency
std::string ngram_csv(const NgramSpectrum& s);     // gram,count,relative
std::string fit_report_text(const FitReport& r);   // key=value lines
std::string fit_overlay_csv(const GroupSpectrum& s, const FitReport& r);
std::string sweep_csv(const std::vector<SweepRow>& rows);

GroupSpectrum parse_spectrum_csv(std::string_view text);

// Flat key=value file (comment lines ignored).
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

// Values reported at corpus scale for comparison with local measurements.
struct ReferenceTargets {
  double contention_peak = 8.0;
  double contention_peak_lo = 7.75;
  double contention_peak_hi = 8.2;
  int spectrum_peak = 4;
  double bot_edit_fraction_min = 0.20;
  double beta_without_bots = 0.93;
  double beta_lo = 0.875;
  double beta_hi = 0.95;
};

}  // namespace editdyn
