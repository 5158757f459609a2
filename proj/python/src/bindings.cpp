#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "editdyn/cli.hpp"
#include "editdyn/contention.hpp"
#include "editdyn/episodes.hpp"
#include "editdyn/error.hpp"
#include "editdyn/ingest.hpp"
#include "editdyn/model.hpp"
#include "editdyn/montecarlo.hpp"
#include "editdyn/ngram.hpp"
#include "editdyn/report.hpp"

namespace py = pybind11;
using namespace editdyn;

namespace {

HistoryFormat format_named(const std::string& name) {
  if (name == "api-json" || name == "json") return HistoryFormat::ApiJson;
  if (name == "dump-xml" || name == "xml") return HistoryFormat::DumpXml;
  if (name == "fixture-csv" || name == "csv") return HistoryFormat::FixtureCsv;
  throw py::value_error("unknown format: " + name);
}

GroupSpectrum to_spectrum(const std::map<int, std::int64_t>& counts) { return GroupSpectrum{counts}; }

GapPolicy policy_for(std::optional<double> gap_days, std::optional<double> multiplier) {
  GapPolicy g;
  if (multiplier) g = GapPolicy::adaptive(*multiplier, gap_days.value_or(2.0) * 86400.0);
  else if (gap_days) g = GapPolicy::absolute(*gap_days * 86400.0);
  return g;
}

}  // namespace

PYBIND11_MODULE(_editdyn, m) {
  m.doc() = "Episodic editing dynamics: ingest, episodes, contention, n-grams, group-size model, simulation";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<UnderdeterminedError>(m, "UnderdeterminedError", error.ptr());
  py::register_exception<OfflineError>(m, "OfflineError", error.ptr());
  py::register_exception<TransportError>(m, "TransportError", error.ptr());
  py::register_exception<NotFoundError>(m, "NotFoundError", error.ptr());

  py::class_<Revision>(m, "Revision")
      .def_readonly("rev_id", &Revision::rev_id)
      .def_readonly("parent_id", &Revision::parent_id)
      .def_readonly("timestamp", &Revision::timestamp)
      .def_readonly("user_key", &Revision::user_key)
      .def_readonly("content_hash", &Revision::content_hash)
      .def_readonly("byte_size", &Revision::byte_size)
      .def_readonly("size_delta", &Revision::size_delta)
      .def_readonly("comment", &Revision::comment)
      .def_readonly("tags", &Revision::tags)
      .def_readonly("is_minor", &Revision::is_minor)
      .def_readonly("is_bot", &Revision::is_bot)
      .def_readonly("text", &Revision::text)
      .def("__repr__", [](const Revision& r) {
        return "<Revision " + std::to_string(r.rev_id) + " by " + r.user_key + ">";
      });

  py::class_<PageHistory>(m, "PageHistory")
      .def_readonly("page_id", &PageHistory::page_id)
      .def_readonly("title", &PageHistory::title)
      .def_readonly("revisions", &PageHistory::revisions)
      .def_readonly("article_length", &PageHistory::article_length)
      .def("to_csv", &write_fixture_csv)
      .def("__len__", [](const PageHistory& h) { return h.revisions.size(); });

  py::class_<Episode>(m, "Episode")
      .def_readonly("page_id", &Episode::page_id)
      .def_readonly("start_ts", &Episode::start_ts)
      .def_readonly("end_ts", &Episode::end_ts)
      .def_property_readonly("first", [](const Episode& e) { return e.revision_range.first; })
      .def_property_readonly("last", [](const Episode& e) { return e.revision_range.last; })
      .def_readonly("n_users", &Episode::n_users)
      .def_readonly("n_users_human", &Episode::n_users_human)
      .def_readonly("duration_days", &Episode::duration_days)
      .def_readonly("contention_count", &Episode::contention_count)
      .def_readonly("work_chars", &Episode::work_chars)
      .def_readonly("duel", &Episode::duel)
      .def("group_size", &Episode::group_size, py::arg("include_bots") = true);

  py::class_<RevertEvent>(m, "RevertEvent")
      .def_readonly("reverting_rev", &RevertEvent::reverting_rev)
      .def_readonly("restored_rev", &RevertEvent::restored_rev)
      .def_readonly("undone_revs", &RevertEvent::undone_revs)
      .def_readonly("reverting_user", &RevertEvent::reverting_user)
      .def_readonly("undone_users", &RevertEvent::undone_users)
      .def_property_readonly("kind", [](const RevertEvent& e) { return std::string(to_string(e.kind)); })
      .def("contentious", &RevertEvent::contentious);

  m.def(
      "parse_history",
      [](const std::string& raw, const std::string& format) { return parse_history(raw, format_named(format)); },
      py::arg("raw"), py::arg("format"), "Parse a history document (api-json, dump-xml or fixture-csv).");
  m.def(
      "load_history_file", [](const std::filesystem::path& p) { return load_history_file(p, {}); }, py::arg("path"));

  m.def(
      "segment_episodes",
      [](const PageHistory& h, std::optional<double> gap_days, std::optional<double> gap_multiplier) {
        auto events = detect_reverts(h);
        auto eps = segment_episodes(h, policy_for(gap_days, gap_multiplier));
        for (auto& e : eps) count_contention(e, events);
        return eps;
      },
      py::arg("history"), py::arg("gap_days") = py::none(), py::arg("gap_multiplier") = py::none(),
      "Episodes of one page with contention counts filled.");
  m.def("detect_reverts", [](const PageHistory& h) { return detect_reverts(h); }, py::arg("history"));

  m.def(
      "ngram_spectrum",
      [](const std::string& text, int n) {
        auto s = ngram_spectrum(text, n);
        return py::make_tuple(s.counts, s.total);
      },
      py::arg("text"), py::arg("n") = 3, "(counts, total) of the symbol n-grams of a text.");
  m.def("work_measure", &work_measure, py::arg("parent_text"), py::arg("new_text"));

  m.def("nu", [](int n, double beta, double n_bar) { return nu(n, {beta, n_bar}); }, py::arg("n"), py::arg("beta"),
        py::arg("n_bar"));
  m.def("psi_density", [](double n, double beta, double n_bar) { return psi_density(n, {beta, n_bar}); },
        py::arg("n"), py::arg("beta"), py::arg("n_bar"));
  m.def(
      "pmf",
      [](double beta, double n_bar, std::optional<int> n_max) {
        ModelParams p{beta, n_bar};
        auto q = n_max ? pmf(p, *n_max) : pmf(p);
        std::map<int, double> out;
        for (int n = q.n_min; n <= q.n_max; ++n) out[n] = q.at(n);
        return out;
      },
      py::arg("beta"), py::arg("n_bar"), py::arg("n_max") = py::none(), "Normalized group-size law over N >= 2.");
  m.def(
      "log_likelihood",
      [](const std::map<int, std::int64_t>& counts, double beta, double n_bar) {
        return log_likelihood(to_spectrum(counts), {beta, n_bar});
      },
      py::arg("counts"), py::arg("beta"), py::arg("n_bar"));
  m.def(
      "fit",
      [](const std::map<int, std::int64_t>& counts, std::optional<double> n_bar, bool least_squares) {
        FitOptions fo;
        fo.fixed_n_bar = n_bar;
        fo.least_squares = least_squares;
        FitReport r;
        {
          py::gil_scoped_release release;
          r = fit(to_spectrum(counts), fo);
        }
        py::dict d;
        d["beta"] = r.params.beta;
        d["n_bar"] = r.params.n_bar;
        d["scale"] = r.scale;
        d["z"] = r.z;
        d["log_likelihood"] = r.log_likelihood;
        d["chi_square"] = r.chi_square;
        d["chi_square_dof"] = r.chi_square_dof;
        d["chi_square_p"] = r.chi_square_p;
        d["episodes"] = r.total;
        d["excluded_singletons"] = r.excluded_singletons;
        d["low_confidence"] = r.low_confidence;
        d["joint"] = r.joint;
        d["method"] = r.method;
        return d;
      },
      py::arg("counts"), py::arg("n_bar") = py::none(), py::arg("least_squares") = false,
      "Fit a {N: count} spectrum. Without n_bar only 2*beta/n_bar is identified.");
  m.def("mean_group_size", [](double beta, double n_bar) {
    auto g = mean_group_size({beta, n_bar});
    return py::make_tuple(g.continuous, g.discrete);
  });
  m.def("fission_ratio", [](double beta, double n_bar) { return fission_ratio({beta, n_bar}); });
  m.def("dunbar_series", &dunbar_series, py::arg("beta"), py::arg("seed"), py::arg("levels") = 4);

  m.def(
      "simulate",
      [](double beta, double n_bar, std::int64_t episodes, std::uint64_t seed, int n_cap, const std::string& rates,
         unsigned threads) {
        SimConfig cfg;
        cfg.params = {beta, n_bar};
        cfg.episodes = episodes;
        cfg.seed = seed;
        cfg.n_cap = n_cap;
        cfg.threads = threads;
        if (rates == "kinetic") cfg.rates = RateScheme::Kinetic;
        else if (rates != "balance") throw py::value_error("rates must be 'balance' or 'kinetic'");
        SimResult r;
        double tv;
        {
          py::gil_scoped_release release;
          r = simulate(cfg);
          tv = total_variation(r.empirical, pmf(cfg.params));
        }
        py::dict d;
        d["sizes"] = r.sizes;
        d["counts"] = r.empirical.counts;
        d["births"] = r.births;
        d["deaths"] = r.deaths;
        d["tv_distance"] = tv;
        return d;
      },
      py::arg("beta"), py::arg("n_bar"), py::arg("episodes") = 10000, py::arg("seed") = 1, py::arg("n_cap") = 0,
      py::arg("rates") = "balance", py::arg("threads") = 0);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "editdyn");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a CLI subcommand; returns (exit_code, stdout, stderr).");
}
