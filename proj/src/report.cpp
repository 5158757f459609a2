#include "editdyn/report.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "editdyn/csv.hpp"
#include "editdyn/error.hpp"

namespace editdyn {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string header(std::string_view columns) {
  std::string out(csv::kSchemaLine);
  out += "\n";
  out += columns;
  out += "\n";
  return out;
}

std::string opt_real(const std::optional<double>& v) { return v ? csv::real(*v) : std::string(); }

}  // namespace

std::vector<CorpusPage> analyze_corpus(std::vector<PageHistory> pages, const AnalysisOptions& options) {
  options.gap.validate();
  std::vector<CorpusPage> out(pages.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pages.size(); i = next++) {
      CorpusPage page;
      page.history = std::move(pages[i]);
      page.episodes = segment_episodes(page.history, options.gap);
      page.reverts = detect_reverts(page.history, options.markers);
      for (auto& e : page.episodes) count_contention(e, page.reverts);
      out[i] = std::move(page);
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, pages.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return out;
}

std::vector<fs::path> list_history_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && format_from_path(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<PageHistory> load_history_file(const fs::path& file, const BotPolicy& bots) {
  auto format = format_from_path(file);
  if (!format) throw Error("unknown history format: " + file.string());
  auto raw = read_file(file);
  std::vector<PageHistory> found;
  try {
    if (*format == HistoryFormat::DumpXml) found = parse_dump_pages(raw, bots);
    else found.push_back(parse_history(raw, *format, bots));
  } catch (const ParseError& e) {
    auto locus = file.filename().string();
    if (!e.locus().empty()) locus += ": " + e.locus();
    throw ParseError(e.message(), locus);
  }
  for (auto& h : found)
    if (h.title.empty()) h.title = file.stem().string();
  return found;
}

std::vector<PageHistory> load_fixture_dir(const fs::path& dir, const BotPolicy& bots) {
  std::vector<PageHistory> pages;
  for (const auto& f : list_history_files(dir))
    for (auto& h : load_history_file(f, bots)) {
      if (h.page_id == 0) h.page_id = static_cast<std::int64_t>(pages.size() + 1);
      pages.push_back(std::move(h));
    }
  return pages;
}

std::vector<Episode> all_episodes(const std::vector<CorpusPage>& corpus) {
  std::vector<Episode> out;
  for (const auto& p : corpus) out.insert(out.end(), p.episodes.begin(), p.episodes.end());
  return out;
}

std::vector<PageEpisodes> page_episodes(const std::vector<CorpusPage>& corpus) {
  std::vector<PageEpisodes> out;
  for (const auto& p : corpus) out.push_back({&p.history, p.episodes});
  return out;
}

GroupSpectrum group_spectrum(const std::vector<Episode>& episodes, bool include_bots) {
  GroupSpectrum s;
  for (const auto& e : episodes) {
    int n = e.group_size(include_bots);
    if (n > 0) ++s.counts[n];
  }
  return s;
}

double bot_edit_fraction(const std::vector<CorpusPage>& corpus) {
  std::size_t bots = 0, total = 0;
  for (const auto& p : corpus)
    for (const auto& r : p.history.revisions) {
      ++total;
      bots += r.is_bot;
    }
  return total ? static_cast<double>(bots) / static_cast<double>(total) : 0.0;
}

// --- tables ---------------------------------------------------------------------

std::string episodes_csv(const std::vector<CorpusPage>& corpus) {
  auto out = header("page_id,start_ts,end_ts,n_users,n_users_human,duration_days,contention_count,work_chars");
  for (const auto& p : corpus)
    for (const auto& e : p.episodes)
      out += csv::join({std::to_string(e.page_id), std::to_string(e.start_ts), std::to_string(e.end_ts),
                        std::to_string(e.n_users), std::to_string(e.n_users_human), csv::real(e.duration_days),
                        std::to_string(e.contention_count), std::to_string(e.work_chars)}) +
             "\n";
  return out;
}

std::string reverts_csv(const std::vector<CorpusPage>& corpus) {
  auto out = header("page_id,reverting_rev,restored_rev,undone_revs,kind");
  for (const auto& p : corpus)
    for (const auto& ev : p.reverts) {
      std::string undone;
      for (auto id : ev.undone_revs) {
        if (!undone.empty()) undone += ';';
        undone += std::to_string(id);
      }
      out += csv::join({std::to_string(p.history.page_id), std::to_string(ev.reverting_rev),
                        ev.restored_rev ? std::to_string(*ev.restored_rev) : "", undone,
                        std::string(to_string(ev.kind))}) +
             "\n";
    }
  return out;
}

std::string fig1_csv(const std::vector<LengthBin>& bins) {
  auto out = header("bin_lo,bin_hi,episodes,mean_n,stderr_n");
  for (const auto& b : bins)
    out += csv::join({csv::real(b.lo), csv::real(b.hi), std::to_string(b.episodes), opt_real(b.mean_n),
                      opt_real(b.stderr_n)}) +
           "\n";
  return out;
}

std::string fig2_csv(const DurationTable& t) {
  auto out = header("N,episodes,mean_duration_days,var_duration_days,mean_duration_per_user_days");
  for (const auto& r : t.rows)
    out += csv::join({std::to_string(r.n), std::to_string(r.episodes), csv::real(r.mean_days),
                      csv::real(r.variance_days), csv::real(r.mean_days_per_user)}) +
           "\n";
  const auto& c = t.clusters;
  out += "# clusters short_center_days=" + csv::real(c.short_center_days) +
         " short_count=" + std::to_string(c.short_count) + " long_center_days=" + csv::real(c.long_center_days) +
         " long_count=" + std::to_string(c.long_count) + " split_days=" + csv::real(c.split_days) +
         " separated=" + (c.separated ? "1" : "0") + "\n";
  return out;
}

std::string fig3_csv(const ContentionCurve& curve) {
  auto out = header("N,episodes,mean_contention,stderr_contention,total_contention");
  for (const auto& r : curve.rows)
    out += csv::join({std::to_string(r.n), std::to_string(r.episodes), csv::real(r.mean), csv::real(r.std_error),
                      std::to_string(r.total)}) +
           "\n";
  if (curve.has_peak()) {
    out += "# peak_argmax=" + std::to_string(*curve.peak_argmax) + "\n";
    out += "# peak_weighted=" + csv::real(*curve.peak_weighted) + "\n";
  } else {
    out += "# peak=none\n";
  }
  return out;
}

std::string spectrum_csv(const GroupSpectrum& s) {
  auto out = header("N,count,frequency");
  for (const auto& [n, c] : s.counts)
    out += std::to_string(n) + "," + std::to_string(c) + "," + csv::real(s.frequency(n), 9) + "\n";
  return out;
}

std::string ngram_csv(const NgramSpectrum& s) {
  auto out = header("gram,count,relative");
  for (const auto& [g, c] : s.counts)
    out += csv::join({g, std::to_string(c), csv::real(static_cast<double>(c) / static_cast<double>(s.total), 9)}) +
           "\n";
  return out;
}

std::string fit_report_text(const FitReport& r) {
  std::string out(csv::kSchemaLine);
  out += "\n";
  auto kv = [&](std::string_view k, const std::string& v) {
    out += k;
    out += "=";
    out += v;
    out += "\n";
  };
  auto iv = [&](std::string_view k, const Interval& i) {
    kv(std::string(k) + "_lo", csv::real(i.lo));
    kv(std::string(k) + "_hi", csv::real(i.hi));
    kv(std::string(k) + "_at_bound", i.lo_at_bound || i.hi_at_bound ? "1" : "0");
  };
  kv("method", r.method);
  kv("mode", r.joint ? "joint" : "n_bar_fixed");
  kv("beta", csv::real(r.params.beta));
  kv("n_bar", csv::real(r.params.n_bar));
  kv("z", csv::real(r.z, 12));
  kv("scale", csv::real(r.scale, 9));
  kv("identifiable", r.joint ? "scale_only" : "beta");
  kv("n_max", std::to_string(r.n_max));
  kv("log_likelihood", csv::real(r.log_likelihood));
  kv("objective", csv::real(r.objective, 9));
  iv("scale_interval", r.scale_interval);
  iv("beta_interval", r.beta_interval);
  iv("n_bar_interval", r.n_bar_interval);
  kv("chi_square", csv::real(r.chi_square));
  kv("chi_square_bins", std::to_string(r.chi_square_bins));
  kv("chi_square_dof", std::to_string(r.chi_square_dof));
  kv("chi_square_p", csv::real(r.chi_square_p));
  kv("episodes", std::to_string(r.total));
  kv("excluded_singletons", std::to_string(r.excluded_singletons));
  kv("low_confidence", r.low_confidence ? "1" : "0");
  kv("continuous_mode", csv::real(continuous_mode(r.params)));
  kv("continuous_mean", csv::real(mean_group_size(r.params).continuous));
  kv("fission_ratio", csv::real(fission_ratio(r.params)));
  return out;
}

std::string fit_overlay_csv(const GroupSpectrum& s, const FitReport& r) {
  auto kept = s.without_singletons();
  auto model = pmf(r.params, r.n_max);
  auto out = header("N,observed_freq,fitted_pmf");
  for (int n = model.n_min; n <= model.n_max; ++n)
    out += std::to_string(n) + "," + csv::real(kept.frequency(n), 9) + "," + csv::real(model.at(n), 9) + "\n";
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  auto out = header("beta,mode,mean,ratio");
  for (const auto& r : rows)
    out += csv::join({csv::real(r.beta), csv::real(r.mode), csv::real(r.mean), csv::real(r.ratio)}) + "\n";
  return out;
}

GroupSpectrum parse_spectrum_csv(std::string_view text) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw ParseError("empty spectrum file", "header");
  if (rows.front().fields.size() < 2 || rows.front().fields[0] != "N" || rows.front().fields[1] != "count")
    throw ParseError("expected header N,count[,frequency]", "line " + std::to_string(rows.front().line));
  GroupSpectrum s;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    auto locus = "line " + std::to_string(rows[i].line);
    try {
      std::size_t used = 0;
      int n = std::stoi(f.at(0), &used);
      if (used != f[0].size() || n < 1) throw ParseError("bad N '" + f[0] + "'", locus);
      long long c = std::stoll(f.at(1), &used);
      if (used != f[1].size() || c < 0) throw ParseError("bad count '" + f[1] + "'", locus);
      if (c > 0) s.counts[n] += c;
    } catch (const std::logic_error&) {
      throw ParseError("bad row", locus);
    }
  }
  return s;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string v) {
      auto b = v.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return v.substr(b, v.find_last_not_of(" \t\r") - b + 1);
    };
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

}  // namespace editdyn
