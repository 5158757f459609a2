#include "editdyn/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "editdyn/csv.hpp"
#include "editdyn/error.hpp"
#include "editdyn/report.hpp"

namespace editdyn {

namespace fs = std::filesystem;

namespace {

// A failure the command reports with a specific exit code.
struct CommandError : Error {
  CommandError(const std::string& message, int code) : Error(message), code(code) {}
  int code;
};

struct Common {
  std::string out = "out";
  std::string bot_list;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CommandError("cannot read " + p.string(), kExitUsage);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& body) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw CommandError("cannot write " + p.string(), kExitFailure);
  f << body;
  if (!f) throw CommandError("cannot write " + p.string(), kExitFailure);
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw CommandError("output directory not writable: " + dir, kExitUsage);
  return p;
}

BotPolicy load_bots(const Common& c) { return c.bot_list.empty() ? BotPolicy{} : BotPolicy::load(c.bot_list); }

std::vector<std::string> read_titles(const fs::path& p) {
  std::istringstream in(read_text(p));
  std::vector<std::string> titles;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    titles.push_back(line.substr(b, e - b + 1));
  }
  return titles;
}

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) body(i);
  };
  if (threads <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
}

std::map<std::string, std::string> key_values(const fs::path& p) {
  std::map<std::string, std::string> m;
  for (auto& [k, v] : parse_key_values(read_text(p))) m[k] = v;
  return m;
}

// --- ingest ---------------------------------------------------------------------

struct IngestArgs {
  Common common;
  std::string titles, fixtures, endpoint, cache;
  bool offline = false;
  bool with_content = false;
  int page_limit = 5000;
  unsigned threads = 4;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  auto bots = load_bots(a.common);
  struct Slot {
    std::string source;
    std::vector<PageHistory> pages;
    std::string error;
  };
  std::vector<Slot> slots;

  if (!a.titles.empty()) {
    auto titles = read_titles(a.titles);
    if (titles.empty()) throw CommandError("no input: " + a.titles + " lists no titles", kExitUsage);
    auto dir = prepare_out(a.common.out);
    FetchOptions fo;
    if (!a.endpoint.empty()) fo.endpoint = a.endpoint;
    fo.page_limit = a.page_limit;
    fo.offline = a.offline;
    fo.cache_dir = a.cache.empty() ? dir / "cache" : fs::path(a.cache);
    fo.with_content = a.with_content;
    fo.bots = bots;
    slots.resize(titles.size());
    parallel_for(titles.size(), a.threads, [&](std::size_t i) {
      slots[i].source = titles[i];
      try {
        slots[i].pages.push_back(fetch_history(titles[i], fo));
      } catch (const std::exception& e) {
        slots[i].error = e.what();
      }
    });
  } else {
    auto files = list_history_files(a.fixtures);
    if (files.empty()) throw CommandError("no input: no history files in " + a.fixtures, kExitUsage);
    slots.resize(files.size());
    parallel_for(files.size(), a.threads, [&](std::size_t i) {
      slots[i].source = files[i].filename().string();
      try {
        slots[i].pages = load_history_file(files[i], bots);
      } catch (const std::exception& e) {
        slots[i].error = e.what();
      }
    });
  }

  auto dir = prepare_out(a.common.out) / "histories";
  fs::create_directories(dir);
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".csv") fs::remove(entry.path());

  std::set<std::int64_t> ids;
  std::set<std::string> users;
  std::size_t pages = 0, revisions = 0, failed = 0;
  std::int64_t next_id = 1;
  for (auto& slot : slots) {
    if (!slot.error.empty()) {
      ++failed;
      err << "error: " << slot.source << ": " << slot.error << "\n";
      continue;
    }
    for (auto& h : slot.pages) {
      if (h.page_id == 0) {
        while (ids.count(next_id)) ++next_id;
        h.page_id = next_id;
      }
      if (!ids.insert(h.page_id).second) {
        ++failed;
        err << "error: " << slot.source << ": duplicate page_id " << h.page_id << "\n";
        continue;
      }
      write_text(dir / (std::to_string(h.page_id) + ".csv"), write_fixture_csv(h));
      ++pages;
      revisions += h.revisions.size();
      for (const auto& r : h.revisions) users.insert(r.user_key);
    }
  }
  out << "ingested pages=" << pages << " revisions=" << revisions << " users=" << users.size()
      << " failed=" << failed << "\n";
  if (pages == 0) return kExitFailure;
  return failed ? kExitPartial : kExitOk;
}

// --- analyze --------------------------------------------------------------------

struct AnalyzeArgs {
  Common common;
  std::string fixtures;
  std::optional<double> gap_days;
  std::optional<double> gap_multiplier;
  std::string bots = "include";
  int ngram_n = 3;
  int length_bins = 8;
  std::size_t top_grams = 10;
  bool no_fit = false;
  unsigned threads = 0;
};

GapPolicy gap_policy(const AnalyzeArgs& a) {
  GapPolicy g;
  if (a.gap_multiplier) {
    g = GapPolicy::adaptive(*a.gap_multiplier, a.gap_days.value_or(2.0) * 86400.0);
  } else if (a.gap_days) {
    g = GapPolicy::absolute(*a.gap_days * 86400.0);
  }
  g.validate();
  return g;
}

struct Variant {
  std::string suffix;
  std::string label;
  bool include_bots;
};

std::string fmt(double v, int precision = 3) { return csv::real(v, precision); }

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  auto bots = load_bots(a.common);
  std::vector<PageHistory> pages;
  if (!a.fixtures.empty()) {
    pages = load_fixture_dir(a.fixtures, bots);
  } else {
    fs::path dir = fs::path(a.common.out) / "histories";
    if (!fs::is_directory(dir))
      throw CommandError("no input: pass --fixtures or run ingest into " + a.common.out, kExitUsage);
    pages = load_fixture_dir(dir, bots);
    std::sort(pages.begin(), pages.end(), [](const auto& x, const auto& y) { return x.page_id < y.page_id; });
  }
  if (pages.empty()) throw CommandError("no input: no page histories found", kExitUsage);
  if (a.ngram_n < 1) throw CommandError("--ngram-n must be at least 1", kExitUsage);
  auto outdir = prepare_out(a.common.out);

  AnalysisOptions opts;
  opts.gap = gap_policy(a);
  opts.threads = a.threads;
  auto corpus = analyze_corpus(std::move(pages), opts);
  auto episodes = all_episodes(corpus);
  std::size_t revisions = 0, reverts = 0;
  for (const auto& p : corpus) {
    revisions += p.history.revisions.size();
    reverts += p.reverts.size();
  }

  write_text(outdir / "episodes.csv", episodes_csv(corpus));
  write_text(outdir / "reverts.csv", reverts_csv(corpus));

  std::vector<Variant> variants;
  if (a.bots == "include") variants.push_back({"", "bots included", true});
  else if (a.bots == "exclude") variants.push_back({"", "bots excluded", false});
  else variants = {{"_with_bots", "bots included", true}, {"_without_bots", "bots excluded", false}};

  const ReferenceTargets ref;
  std::ostringstream summary;
  summary << csv::kSchemaLine << "\n";
  summary << "pages=" << corpus.size() << "\nrevisions=" << revisions << "\nepisodes=" << episodes.size()
          << "\nreverts=" << reverts << "\nbot_edit_fraction=" << csv::real(bot_edit_fraction(corpus)) << "\n";
  summary << "gap_policy=" << (opts.gap.mode == GapPolicy::Mode::Absolute ? "absolute" : "adaptive") << "\n";

  out << "pages=" << corpus.size() << " revisions=" << revisions << " episodes=" << episodes.size()
      << " reverts=" << reverts << "\n";
  out << "bot edit fraction      " << fmt(bot_edit_fraction(corpus)) << "   (corpus-scale reference > "
      << fmt(ref.bot_edit_fraction_min, 2) << ")\n";
  if (episodes.empty()) err << "notice: no episodes found; figure tables carry headers only\n";

  for (const auto& v : variants) {
    auto tag = v.suffix.empty() ? std::string() : " [" + v.label + "]";
    auto bins = episodes.empty() ? std::vector<LengthBin>{}
                                 : mean_group_size_vs_length(page_episodes(corpus), a.length_bins, v.include_bots);
    write_text(outdir / ("fig1_length_vs_n" + v.suffix + ".csv"), fig1_csv(bins));
    write_text(outdir / ("fig2_duration_vs_n" + v.suffix + ".csv"), fig2_csv(duration_vs_n(episodes, v.include_bots)));

    ContentionCurve curve;
    try {
      curve = contention_curve(episodes, v.include_bots);
    } catch (const DomainError& e) {
      err << "notice" << tag << ": contention curve empty: " << e.what() << "\n";
    }
    write_text(outdir / ("fig3_contention_curve" + v.suffix + ".csv"), fig3_csv(curve));

    auto spectrum = group_spectrum(episodes, v.include_bots);
    write_text(outdir / ("fig4_spectrum" + v.suffix + ".csv"), spectrum_csv(spectrum));

    out << "spectrum mode" << tag << "    " << spectrum.mode() << "   (corpus-scale reference ~"
        << ref.spectrum_peak << ")\n";
    out << "contention peak" << tag << "  ";
    if (curve.has_peak())
      out << "argmax " << *curve.peak_argmax << ", weighted " << fmt(*curve.peak_weighted);
    else
      out << "none";
    out << "   (corpus-scale reference ~" << fmt(ref.contention_peak, 1) << ", " << fmt(ref.contention_peak_lo, 2)
        << "-" << fmt(ref.contention_peak_hi, 1) << ")\n";

    summary << "spectrum_mode" << v.suffix << "=" << spectrum.mode() << "\n";
    summary << "spectrum_mean" << v.suffix << "=" << csv::real(spectrum.mean()) << "\n";
    if (curve.has_peak()) {
      summary << "contention_peak_argmax" << v.suffix << "=" << *curve.peak_argmax << "\n";
      summary << "contention_peak_weighted" << v.suffix << "=" << csv::real(*curve.peak_weighted) << "\n";
    }

    if (a.no_fit) continue;
    auto kept = spectrum.without_singletons();
    if (kept.counts.size() < 2) {
      err << "notice" << tag << ": fit skipped: "
          << (kept.counts.empty() ? "only N=1 episodes" : "fewer than two group sizes above N=1") << "\n";
      summary << "fit" << v.suffix << "=skipped\n";
      continue;
    }
    FitOptions fo;
    if (curve.has_peak() && *curve.peak_weighted > 1.0) fo.fixed_n_bar = *curve.peak_weighted;
    try {
      auto report = fit(spectrum, fo);
      write_text(outdir / ("fit_report" + v.suffix + ".txt"), fit_report_text(report));
      write_text(outdir / ("fit_overlay" + v.suffix + ".csv"), fit_overlay_csv(spectrum, report));
      summary << "fit_beta" << v.suffix << "=" << csv::real(report.params.beta) << "\n";
      summary << "fit_n_bar" << v.suffix << "=" << csv::real(report.params.n_bar) << "\n";
      summary << "fit_scale" << v.suffix << "=" << csv::real(report.scale, 9) << "\n";
      out << "fit" << tag << "              beta " << fmt(report.params.beta) << ", n_bar "
          << fmt(report.params.n_bar) << (report.joint ? " (joint: only 2*beta/n_bar identified)" : " (n_bar from contention peak)");
      if (!v.include_bots) out << "   (corpus-scale reference beta " << fmt(ref.beta_without_bots, 2) << ")";
      out << "\n";
      if (report.low_confidence) err << "notice" << tag << ": fit on fewer than 100 episodes is low confidence\n";
    } catch (const UnderdeterminedError& e) {
      err << "notice" << tag << ": fit skipped: " << e.what() << "\n";
      summary << "fit" << v.suffix << "=skipped\n";
    }
  }

  std::vector<NgramSpectrum> spectra(corpus.size());
  std::vector<bool> has_text(corpus.size(), false);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& revs = corpus[i].history.revisions;
    for (auto it = revs.rbegin(); it != revs.rend(); ++it)
      if (it->text) {
        spectra[i] = ngram_spectrum(*it->text, a.ngram_n);
        has_text[i] = true;
        break;
      }
  }
  std::vector<NgramSpectrum> present;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (has_text[i]) present.push_back(spectra[i]);
  if (present.empty()) {
    err << "notice: no page text in input; n-gram tables not written\n";
  } else {
    auto background = merge_spectra(present);
    write_text(outdir / "ngram_spectrum.csv", ngram_csv(background));
    std::string table(csv::kSchemaLine);
    table += "\npage_id,rank,gram,ratio\n";
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (!has_text[i]) continue;
      auto top = significant_grams(spectra[i], background, a.top_grams);
      for (std::size_t r = 0; r < top.size(); ++r)
        table += csv::join({std::to_string(corpus[i].history.page_id), std::to_string(r + 1), top[r].gram,
                            csv::real(top[r].ratio)}) +
                 "\n";
    }
    write_text(outdir / "ngram_significant.csv", table);
  }

  write_text(outdir / "summary.txt", summary.str());
  return kExitOk;
}

// --- fit ------------------------------------------------------------------------

struct FitArgs {
  Common common;
  std::string spectrum;
  std::optional<double> n_bar;
  bool least_squares = false;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  auto outdir = prepare_out(a.common.out);
  fs::path path = a.spectrum;
  if (path.empty()) {
    for (auto name : {"fig4_spectrum.csv", "fig4_spectrum_without_bots.csv"})
      if (fs::exists(outdir / name)) {
        path = outdir / name;
        break;
      }
    if (path.empty()) throw CommandError("no input: no spectrum file in " + a.common.out, kExitUsage);
  }
  auto spectrum = parse_spectrum_csv(read_text(path));
  FitOptions fo;
  fo.fixed_n_bar = a.n_bar;
  fo.least_squares = a.least_squares;
  FitReport report;
  try {
    report = fit(spectrum, fo);
  } catch (const UnderdeterminedError& e) {
    throw CommandError(std::string(e.what()) + ": " + path.string(), kExitFailure);
  }
  write_text(outdir / "fit_report.txt", fit_report_text(report));
  write_text(outdir / "fit_overlay.csv", fit_overlay_csv(spectrum, report));
  out << "fit beta=" << fmt(report.params.beta, 4) << " n_bar=" << fmt(report.params.n_bar, 4)
      << " z=" << csv::real(report.z, 6) << " scale=" << csv::real(report.scale, 6)
      << " chi_square=" << fmt(report.chi_square) << " dof=" << report.chi_square_dof
      << " p=" << fmt(report.chi_square_p, 4) << "\n";
  if (report.joint)
    err << "notice: beta and n_bar are not separately identifiable from a spectrum; pass --nbar to anchor\n";
  if (report.low_confidence) err << "notice: fit on fewer than 100 episodes is low confidence\n";
  return kExitOk;
}

// --- simulate -------------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::optional<double> beta, n_bar;
  std::int64_t episodes = 100000;
  std::uint64_t seed = 1;
  int n_cap = 0;
  std::string rates = "balance";
  double exponent = 1.0;
  std::string sweep;
  unsigned threads = 0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  auto outdir = prepare_out(a.common.out);
  SimConfig cfg;
  std::optional<double> beta = a.beta, n_bar = a.n_bar;
  if (!beta || !n_bar) {
    auto prior = outdir / "fit_report.txt";
    if (!fs::exists(prior))
      throw CommandError("simulate needs --beta and --nbar, or a fit_report.txt in " + a.common.out, kExitUsage);
    auto kv = key_values(prior);
    if (!beta) beta = std::stod(kv.at("beta"));
    if (!n_bar) n_bar = std::stod(kv.at("n_bar"));
  }
  cfg.params = {*beta, *n_bar};
  cfg.episodes = a.episodes;
  cfg.seed = a.seed;
  cfg.n_cap = a.n_cap;
  cfg.attachment_exponent = a.exponent;
  cfg.rates = a.rates == "kinetic" ? RateScheme::Kinetic : RateScheme::DetailedBalance;
  cfg.threads = a.threads;

  auto sim = simulate(cfg);
  for (const auto& w : sim.warnings) err << "warning: " << w << "\n";
  auto target = pmf(cfg.params);
  double tv = total_variation(sim.empirical, target);
  write_text(outdir / "sim_spectrum.csv", spectrum_csv(sim.empirical));

  std::ostringstream rep;
  rep << csv::kSchemaLine << "\n";
  rep << "beta=" << csv::real(cfg.params.beta) << "\nn_bar=" << csv::real(cfg.params.n_bar)
      << "\nepisodes=" << cfg.episodes << "\nseed=" << cfg.seed << "\nn_cap=" << cfg.effective_n_cap()
      << "\nrates=" << (cfg.rates == RateScheme::Kinetic ? "kinetic" : "balance")
      << "\nattachment_exponent=" << csv::real(cfg.attachment_exponent) << "\nbirths=" << sim.births
      << "\ndeaths=" << sim.deaths << "\nempirical_mode=" << sim.empirical.mode()
      << "\nempirical_mean=" << csv::real(sim.empirical.mean()) << "\npmf_argmax=" << target.argmax()
      << "\npmf_mean=" << csv::real(target.mean()) << "\ntv_distance=" << csv::real(tv, 9) << "\n";
  for (const auto& w : sim.warnings) rep << "# warning: " << w << "\n";
  write_text(outdir / "sim_report.txt", rep.str());
  out << "simulated episodes=" << cfg.episodes << " mode=" << sim.empirical.mode()
      << " mean=" << fmt(sim.empirical.mean()) << " tv_distance=" << csv::real(tv, 6) << "\n";

  if (!a.sweep.empty()) {
    double lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(a.sweep);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':')
      throw CommandError("--sweep expects low:high:step", kExitUsage);
    auto rows = sweep_beta(lo, hi, step, cfg);
    write_text(outdir / "sweep.csv", sweep_csv(rows));
    out << "sweep rows=" << rows.size() << "\n";
  }
  return kExitOk;
}

// --- report ---------------------------------------------------------------------

int cmd_report(const Common& c, int levels, std::ostream& out, std::ostream& err) {
  fs::path dir(c.out);
  if (!fs::exists(dir / "summary.txt"))
    throw CommandError("no input: no summary.txt in " + c.out + "; run analyze first", kExitUsage);
  auto s = key_values(dir / "summary.txt");
  const ReferenceTargets ref;
  auto get = [&](const std::string& k) { return s.count(k) ? s.at(k) : std::string("-"); };

  std::ostringstream r;
  r << csv::kSchemaLine << "\n";
  r << "corpus: pages=" << get("pages") << " revisions=" << get("revisions") << " episodes=" << get("episodes")
    << " reverts=" << get("reverts") << "\n\n";
  char line[160];
  auto row = [&](const std::string& name, const std::string& measured, const std::string& reference) {
    std::snprintf(line, sizeof line, "%-42s %-14s %s\n", name.c_str(), measured.c_str(), reference.c_str());
    r << line;
  };
  row("quantity", "measured", "corpus-scale reference");
  row("bot edit fraction", get("bot_edit_fraction"), "> " + fmt(ref.bot_edit_fraction_min, 2));
  std::vector<std::string> suffixes;
  for (auto sfx : {"", "_with_bots", "_without_bots"})
    if (s.count(std::string("spectrum_mode") + sfx)) suffixes.push_back(sfx);
  for (const auto& sfx : suffixes) {
    auto label = sfx.empty() ? std::string() : " (" + sfx.substr(1) + ")";
    row("spectrum peak" + label, get("spectrum_mode" + sfx), "~" + std::to_string(ref.spectrum_peak));
    row("contention peak, argmax" + label, get("contention_peak_argmax" + sfx),
        "~" + fmt(ref.contention_peak, 0) + " (" + fmt(ref.contention_peak_lo, 2) + "-" +
            fmt(ref.contention_peak_hi, 1) + ")");
    row("contention peak, weighted" + label, get("contention_peak_weighted" + sfx),
        "~" + fmt(ref.contention_peak, 0) + " (" + fmt(ref.contention_peak_lo, 2) + "-" +
            fmt(ref.contention_peak_hi, 1) + ")");
    row("fitted beta" + label, get("fit_beta" + sfx),
        sfx == "_with_bots" ? std::string("-") : fmt(ref.beta_without_bots, 2) + " (bots excluded)");
    row("fitted n_bar" + label, get("fit_n_bar" + sfx), "-");
  }

  for (const auto& sfx : suffixes) {
    if (!s.count("fit_beta" + sfx)) continue;
    ModelParams p{std::stod(s.at("fit_beta" + sfx)), std::stod(s.at("fit_n_bar" + sfx))};
    auto m = mean_group_size(p);
    r << "\nmodel at fit" << (sfx.empty() ? "" : " (" + sfx.substr(1) + ")") << ": continuous mode "
      << fmt(continuous_mode(p)) << ", mean " << fmt(m.continuous) << " (discrete " << fmt(m.discrete)
      << "), fission ratio " << fmt(fission_ratio(p)) << "\n";
    try {
      auto series = dunbar_series(p.beta, p.n_bar, levels);
      r << "hierarchy from n_bar:";
      for (double v : series) r << " " << fmt(v, 2);
      r << "\n";
    } catch (const DomainError& e) {
      r << "hierarchy: " << e.what() << "\n";
    }
  }
  if (fs::exists(dir / "sim_report.txt")) {
    auto sim = key_values(dir / "sim_report.txt");
    r << "\nsimulation: beta=" << sim["beta"] << " n_bar=" << sim["n_bar"] << " episodes=" << sim["episodes"]
      << " tv_distance=" << sim["tv_distance"] << "\n";
  }
  r << "\nThe references are corpus-scale values from hundreds of live pages; a small local corpus is\n"
       "not expected to match them. See README for the crawl command sequence.\n";
  write_text(dir / "report.txt", r.str());
  out << r.str();
  (void)err;
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Episodic editing dynamics of wiki pages: ingest, analyze, fit, simulate, report", "editdyn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "editdyn 1.0");

  auto add_common = [](CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
    sub->add_option("--bot-list", c.bot_list, "File of 'bot <name>' / 'human <name>' overrides");
  };

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Fetch or parse histories into canonical per-page files");
  add_common(ingest, ia.common);
  auto* titles = ingest->add_option("--titles", ia.titles, "File with one page title per line");
  auto* fixtures = ingest->add_option("--fixtures", ia.fixtures, "Directory of local history files");
  titles->excludes(fixtures);
  fixtures->excludes(titles);
  ingest->add_flag("--offline", ia.offline, "Serve API responses from the cache only");
  ingest->add_option("--endpoint", ia.endpoint, "MediaWiki api.php URL (default $EDITDYN_API_URL or enwiki)");
  ingest->add_option("--cache", ia.cache, "Response cache directory (default <out>/cache)");
  ingest->add_option("--page-limit", ia.page_limit, "Most revisions fetched per page")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ingest->add_flag("--with-content", ia.with_content, "Also fetch page text");
  ingest->add_option("--threads", ia.threads, "Concurrent pages")->capture_default_str();

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "Episodes, reverts, contention and figure tables");
  add_common(analyze, aa.common);
  analyze->add_option("--fixtures", aa.fixtures, "Directory of history files (default <out>/histories)");
  analyze->add_option("--gap-days", aa.gap_days, "Absolute gap threshold in days, or the adaptive floor");
  analyze->add_option("--gap-multiplier", aa.gap_multiplier, "Adaptive threshold: multiple of the median gap");
  analyze->add_option("--bots", aa.bots, "Bot handling")
      ->check(CLI::IsMember({"include", "exclude", "both"}))
      ->capture_default_str();
  analyze->add_option("--ngram-n", aa.ngram_n, "n-gram length")->capture_default_str();
  analyze->add_option("--length-bins", aa.length_bins, "Log bins over article length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  analyze->add_option("--top-grams", aa.top_grams, "Significant grams listed per page")->capture_default_str();
  analyze->add_flag("--no-fit", aa.no_fit, "Skip the spectrum fit");
  analyze->add_option("--threads", aa.threads, "Worker threads (0: all cores)");

  FitArgs fa;
  auto* fitc = app.add_subcommand("fit", "Fit the group-size law to a spectrum");
  add_common(fitc, fa.common);
  fitc->add_option("--spectrum", fa.spectrum, "N,count CSV (default <out>/fig4_spectrum.csv)");
  fitc->add_option("--nbar", fa.n_bar, "Hold n_bar fixed and fit beta")->check(CLI::Range(1.0 + 1e-9, 1e6));
  fitc->add_flag("--least-squares", fa.least_squares, "Squared error on frequencies instead of likelihood");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Birth/death Monte Carlo of group sizes");
  add_common(sim, sa.common);
  sim->add_option("--beta", sa.beta, "beta (default from <out>/fit_report.txt)");
  sim->add_option("--nbar", sa.n_bar, "n_bar (default from <out>/fit_report.txt)");
  sim->add_option("--episodes", sa.episodes, "Episodes simulated")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--seed", sa.seed, "RNG seed")->capture_default_str();
  sim->add_option("--ncap", sa.n_cap, "Largest group size (default ceil(10*n_bar))");
  sim->add_option("--rates", sa.rates, "Transition rates")
      ->check(CLI::IsMember({"balance", "kinetic"}))
      ->capture_default_str();
  sim->add_option("--exponent", sa.exponent, "Attachment exponent gamma")->capture_default_str();
  sim->add_option("--sweep", sa.sweep, "beta sweep low:high:step, written to sweep.csv");
  sim->add_option("--threads", sa.threads, "Worker threads (0: all cores)");

  Common rc;
  int levels = 4;
  auto* rep = app.add_subcommand("report", "Measured values beside the corpus-scale references");
  add_common(rep, rc);
  rep->add_option("--levels", levels, "Hierarchy levels printed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) {
      if (ia.titles.empty() && ia.fixtures.empty())
        throw CommandError("no input: pass --titles or --fixtures", kExitUsage);
      return cmd_ingest(ia, out, err);
    }
    if (analyze->parsed()) return cmd_analyze(aa, out, err);
    if (fitc->parsed()) return cmd_fit(fa, out, err);
    if (sim->parsed()) return cmd_simulate(sa, out, err);
    return cmd_report(rc, levels, out, err);
  } catch (const CommandError& e) {
    err << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace editdyn
