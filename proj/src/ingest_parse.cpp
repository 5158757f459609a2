#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "editdyn/csv.hpp"
#include "editdyn/error.hpp"
#include "editdyn/ingest.hpp"

namespace editdyn {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<std::int64_t> to_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

bool all_of(std::string_view s, int (*pred)(int)) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [&](char c) { return pred(static_cast<unsigned char>(c)); });
}

}  // namespace

// --- timestamps -------------------------------------------------------------

Timestamp parse_timestamp(std::string_view text) {
  text = trim(text);
  if (auto v = to_int(text)) return *v;
  // YYYY-MM-DDTHH:MM:SS[.fff][Z]
  auto num = [&](std::size_t pos, std::size_t len) -> int {
    if (pos + len > text.size()) throw ParseError("bad timestamp '" + std::string(text) + "'", "timestamp");
    auto v = to_int(text.substr(pos, len));
    if (!v) throw ParseError("bad timestamp '" + std::string(text) + "'", "timestamp");
    return static_cast<int>(*v);
  };
  if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':')
    throw ParseError("bad timestamp '" + std::string(text) + "'", "timestamp");
  using namespace std::chrono;
  year_month_day ymd{year{num(0, 4)}, month{static_cast<unsigned>(num(5, 2))}, day{static_cast<unsigned>(num(8, 2))}};
  if (!ymd.ok()) throw ParseError("bad calendar date '" + std::string(text) + "'", "timestamp");
  int hh = num(11, 2), mm = num(14, 2), ss = num(17, 2);
  if (hh > 23 || mm > 59 || ss > 60) throw ParseError("bad clock time '" + std::string(text) + "'", "timestamp");
  auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Timestamp>(days) * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  auto days = ts >= 0 ? ts / 86400 : -((-ts + 86399) / 86400);
  auto rem = ts - days * 86400;
  year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

// --- formats ----------------------------------------------------------------

std::string_view to_string(HistoryFormat format) {
  switch (format) {
    case HistoryFormat::ApiJson: return "api-json";
    case HistoryFormat::DumpXml: return "dump-xml";
    case HistoryFormat::FixtureCsv: return "fixture-csv";
  }
  return "?";
}

std::optional<HistoryFormat> format_from_path(const std::filesystem::path& path) {
  auto ext = lower(path.extension().string());
  if (ext == ".json") return HistoryFormat::ApiJson;
  if (ext == ".xml") return HistoryFormat::DumpXml;
  if (ext == ".csv") return HistoryFormat::FixtureCsv;
  return std::nullopt;
}

// --- bots -------------------------------------------------------------------

BotPolicy BotPolicy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open bot policy file " + path.string());
  BotPolicy policy;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    std::string_view body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    auto sp = body.find_first_of(" \t");
    if (sp == std::string_view::npos) throw ParseError("expected '<bot|human> <name>'", path.string() + ":" + std::to_string(lineno));
    auto kind = lower(body.substr(0, sp));
    auto name = lower(trim(body.substr(sp)));
    if (kind == "bot") policy.force_bot.insert(name);
    else if (kind == "human") policy.force_human.insert(name);
    else throw ParseError("unknown list '" + kind + "'", path.string() + ":" + std::to_string(lineno));
  }
  return policy;
}

bool is_anonymous(std::string_view key) {
  if (key.empty()) return true;
  if (key.front() == '~') return true;  // temporary accounts
  // IPv4
  {
    int parts = 0;
    std::size_t start = 0;
    bool ok = true;
    while (ok) {
      auto dot = key.find('.', start);
      auto part = key.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
      auto v = to_int(part);
      ok = part.size() <= 3 && all_of(part, [](int c) { return std::isdigit(c); }) && v && *v <= 255;
      ++parts;
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
    if (ok && parts == 4) return true;
  }
  // IPv6: hex groups and colons only, at least two colons
  if (std::count(key.begin(), key.end(), ':') >= 2 &&
      std::all_of(key.begin(), key.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)) || c == ':'; }))
    return true;
  return false;
}

bool classify_bot(std::string_view user_key, const std::set<std::string>& flags, const BotPolicy& policy) {
  for (const auto& f : flags)
    if (lower(f) == "bot") return true;
  auto name = lower(trim(user_key));
  if (policy.force_human.count(name)) return false;
  if (policy.force_bot.count(name)) return true;
  if (is_anonymous(user_key)) return false;
  std::size_t start = 0;
  while (start <= name.size()) {
    auto end = name.find_first_of(" _-", start);
    if (end == std::string::npos) end = name.size();
    std::string_view word(name.data() + start, end - start);
    if (word.size() >= 3 && word.substr(word.size() - 3) == "bot") return true;
    start = end + 1;
  }
  return false;
}

// --- canonical form ---------------------------------------------------------

void canonicalize(PageHistory& h, const BotPolicy& policy, bool derive_deltas) {
  if (h.revisions.empty()) throw ParseError("empty history", h.title.empty() ? "revisions" : h.title);
  std::stable_sort(h.revisions.begin(), h.revisions.end(), [](const Revision& a, const Revision& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.rev_id < b.rev_id;
  });
  std::unordered_map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < h.revisions.size(); ++i) {
    auto& r = h.revisions[i];
    if (!index.emplace(r.rev_id, i).second)
      throw ParseError("duplicate rev_id " + std::to_string(r.rev_id), "rev_id");
    if (r.byte_size < 0) throw ParseError("negative byte_size", "rev " + std::to_string(r.rev_id) + " byte_size");
    if (r.parent_id && *r.parent_id == 0) r.parent_id.reset();
  }
  for (std::size_t i = 0; i < h.revisions.size(); ++i) {
    auto& r = h.revisions[i];
    if (derive_deltas) {
      if (!r.parent_id) {
        r.size_delta = r.byte_size;
      } else if (auto it = index.find(*r.parent_id); it != index.end()) {
        r.size_delta = r.byte_size - h.revisions[it->second].byte_size;
      } else {
        // parent outside the fetched window
        r.size_delta = i == 0 ? r.byte_size : r.byte_size - h.revisions[i - 1].byte_size;
      }
    }
    r.is_bot = classify_bot(r.user_key, r.tags, policy);
  }
  const auto& first = h.revisions.front();
  if (!first.parent_id && first.size_delta != first.byte_size)
    throw ParseError("first revision size_delta must equal byte_size", "rev " + std::to_string(first.rev_id) + " size_delta");
  h.article_length = h.revisions.back().byte_size;
}

// --- fixture-csv --------------------------------------------------------------

namespace {

std::set<std::string> split_tags(std::string_view s) {
  std::set<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(';', start);
    if (end == std::string_view::npos) end = s.size();
    auto t = trim(s.substr(start, end - start));
    if (!t.empty()) out.emplace(t);
    start = end + 1;
  }
  return out;
}

bool parse_bool(std::string_view s, const std::string& locus) {
  auto v = lower(trim(s));
  if (v.empty() || v == "0" || v == "false" || v == "no") return false;
  if (v == "1" || v == "true" || v == "yes") return true;
  throw ParseError("bad boolean '" + v + "'", locus);
}

PageHistory parse_fixture_csv(std::string_view raw) {
  std::vector<std::string> comments;
  auto rows = csv::parse(raw, &comments);
  PageHistory h;
  for (const auto& c : comments) {
    auto body = trim(std::string_view(c).substr(1));
    auto eq = body.find('=');
    if (eq == std::string_view::npos) continue;
    auto k = trim(body.substr(0, eq));
    auto v = trim(body.substr(eq + 1));
    if (k == "page_id") {
      auto n = to_int(v);
      if (!n) throw ParseError("bad page_id", "page_id");
      h.page_id = *n;
    } else if (k == "title") {
      h.title = std::string(v);
    }
  }
  if (rows.empty()) throw ParseError("empty history", "header");
  static const std::vector<std::string> expected = csv::parse(kFixtureCsvHeader).front().fields;
  if (rows.front().fields != expected) throw ParseError("unexpected header", "line " + std::to_string(rows.front().line));

  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& f = rows[k].fields;
    auto locus = [&](std::string_view col) { return "line " + std::to_string(rows[k].line) + " " + std::string(col); };
    if (f.size() != expected.size())
      throw ParseError("expected " + std::to_string(expected.size()) + " fields, got " + std::to_string(f.size()),
                       "line " + std::to_string(rows[k].line));
    Revision r;
    auto need_int = [&](std::size_t col) {
      auto v = to_int(f[col]);
      if (!v) throw ParseError("bad integer '" + f[col] + "'", locus(expected[col]));
      return *v;
    };
    r.rev_id = need_int(0);
    if (!trim(f[1]).empty()) r.parent_id = need_int(1);
    try {
      r.timestamp = parse_timestamp(f[2]);
    } catch (const ParseError&) {
      throw ParseError("bad timestamp '" + f[2] + "'", locus("timestamp"));
    }
    r.user_key = std::string(trim(f[3]));
    if (r.user_key.empty()) throw ParseError("empty user_key", locus("user_key"));
    r.content_hash = std::string(trim(f[4]));
    r.byte_size = need_int(5);
    r.size_delta = need_int(6);
    r.comment = f[7];
    r.tags = split_tags(f[8]);
    r.is_minor = parse_bool(f[9], locus("is_minor"));
    h.revisions.push_back(std::move(r));
  }
  return h;
}

// --- api-json -----------------------------------------------------------------

void parse_api_document(const json& doc, PageHistory& h, bool& seen_page, const std::string& where) {
  if (!doc.is_object()) throw ParseError("response is not an object", where);
  if (doc.contains("error")) {
    const auto& e = doc["error"];
    std::string code = e.is_object() && e.contains("code") ? e["code"].get<std::string>() : "unknown";
    if (code == "missingtitle" || code == "nosuchpageid") throw NotFoundError("page not found");
    throw ParseError("API error '" + code + "'", where + ".error");
  }
  if (!doc.contains("query")) {
    if (doc.contains("batchcomplete")) return;
    throw ParseError("missing field", where + ".query");
  }
  const auto& query = doc["query"];
  if (!query.contains("pages")) throw ParseError("missing field", where + ".query.pages");
  const auto& pages_node = query["pages"];
  std::vector<const json*> pages;
  if (pages_node.is_array()) {
    for (const auto& p : pages_node) pages.push_back(&p);
  } else if (pages_node.is_object()) {
    for (const auto& [_, p] : pages_node.items()) pages.push_back(&p);
  } else {
    throw ParseError("pages is neither array nor object", where + ".query.pages");
  }
  if (pages.empty()) throw ParseError("no page in response", where + ".query.pages");
  const json& page = *pages.front();
  auto ploc = where + ".query.pages[0]";
  if (page.contains("missing") && !(page["missing"].is_boolean() && !page["missing"].get<bool>()))
    throw NotFoundError("page not found: " + page.value("title", std::string{}));
  if (page.contains("invalid")) throw NotFoundError("invalid title: " + page.value("title", std::string{}));
  try {
    std::int64_t pid = page.at("pageid").get<std::int64_t>();
    if (seen_page && pid != h.page_id) throw ParseError("responses mix pages", ploc + ".pageid");
    h.page_id = pid;
    h.title = page.at("title").get<std::string>();
  } catch (const json::exception&) {
    throw ParseError("missing or mistyped field", ploc + ".pageid/title");
  }
  seen_page = true;
  if (!page.contains("revisions")) return;
  const auto& revs = page["revisions"];
  if (!revs.is_array()) throw ParseError("revisions is not an array", ploc + ".revisions");
  for (std::size_t i = 0; i < revs.size(); ++i) {
    const auto& jr = revs[i];
    auto loc = ploc + ".revisions[" + std::to_string(i) + "]";
    auto field = [&](const char* name) -> const json& {
      if (!jr.contains(name)) throw ParseError("missing field", loc + "." + name);
      return jr[name];
    };
    auto presence = [&](const char* name) {
      if (!jr.contains(name)) return false;
      const auto& v = jr[name];
      return v.is_boolean() ? v.get<bool>() : true;
    };
    Revision r;
    try {
      r.rev_id = field("revid").get<std::int64_t>();
      if (jr.contains("parentid")) r.parent_id = jr["parentid"].get<std::int64_t>();
    } catch (const json::exception&) {
      throw ParseError("not an integer", loc + ".revid/parentid");
    }
    const auto& ts = field("timestamp");
    if (!ts.is_string()) throw ParseError("not a string", loc + ".timestamp");
    try {
      r.timestamp = parse_timestamp(ts.get<std::string>());
    } catch (const ParseError&) {
      throw ParseError("bad timestamp", loc + ".timestamp");
    }
    if (presence("userhidden")) r.user_key = "(hidden)";
    else if (!jr.contains("user") || !jr["user"].is_string()) throw ParseError("missing field", loc + ".user");
    else r.user_key = jr["user"].get<std::string>();
    if (jr.contains("sha1") && jr["sha1"].is_string()) r.content_hash = jr["sha1"].get<std::string>();
    const auto& size = field("size");
    if (!size.is_number_integer()) throw ParseError("not an integer", loc + ".size");
    r.byte_size = size.get<std::int64_t>();
    if (jr.contains("comment") && jr["comment"].is_string()) r.comment = jr["comment"].get<std::string>();
    if (jr.contains("tags")) {
      if (!jr["tags"].is_array()) throw ParseError("tags is not an array", loc + ".tags");
      for (const auto& t : jr["tags"]) {
        if (!t.is_string()) throw ParseError("tag is not a string", loc + ".tags");
        r.tags.insert(t.get<std::string>());
      }
    }
    r.is_minor = presence("minor");
    if (jr.contains("slots") && jr["slots"].contains("main")) {
      const auto& main = jr["slots"]["main"];
      if (main.contains("content") && main["content"].is_string()) r.text = main["content"].get<std::string>();
      else if (main.contains("*") && main["*"].is_string()) r.text = main["*"].get<std::string>();
    } else if (jr.contains("content") && jr["content"].is_string()) {
      r.text = jr["content"].get<std::string>();
    } else if (jr.contains("*") && jr["*"].is_string()) {
      r.text = jr["*"].get<std::string>();
    }
    h.revisions.push_back(std::move(r));
  }
}

PageHistory parse_api_json(std::string_view raw) {
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), "byte " + std::to_string(e.byte));
  }
  PageHistory h;
  bool seen = false;
  if (doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i) parse_api_document(doc[i], h, seen, "[" + std::to_string(i) + "]");
  } else {
    parse_api_document(doc, h, seen, "$");
  }
  return h;
}

// --- dump-xml -----------------------------------------------------------------

// Dumps store sha1 as 31 base-36 digits; convert to 40 hex digits.
std::string base36_sha1_to_hex(std::string_view b36) {
  std::array<std::uint32_t, 5> limbs{};  // little-endian 160-bit integer
  for (char c : b36) {
    std::uint32_t d = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : c - 'a' + 10;
    std::uint64_t carry = d;
    for (auto& limb : limbs) {
      std::uint64_t v = static_cast<std::uint64_t>(limb) * 36 + carry;
      limb = static_cast<std::uint32_t>(v);
      carry = v >> 32;
    }
  }
  std::string hex;
  static const char* digits = "0123456789abcdef";
  for (int k = 4; k >= 0; --k)
    for (int s = 28; s >= 0; s -= 4) hex.push_back(digits[(limbs[k] >> s) & 0xF]);
  return hex;
}

std::string normalize_dump_sha1(std::string s) {
  s = lower(s);
  if (s.size() == 31 && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c)) || (c >= 'a' && c <= 'z');
      }))
    return base36_sha1_to_hex(s);
  return s;
}

namespace pt = boost::property_tree;

PageHistory parse_dump_page(const pt::ptree& page, std::size_t page_index) {
  PageHistory h;
  auto ploc = "page[" + std::to_string(page_index) + "]";
  h.title = page.get<std::string>("title", "");
  auto pid = to_int(page.get<std::string>("id", ""));
  if (!pid) throw ParseError("missing or bad page id", ploc + "/id");
  h.page_id = *pid;
  std::size_t ri = 0;
  for (const auto& [name, rev] : page) {
    if (name != "revision") continue;
    auto loc = ploc + "/revision[" + std::to_string(ri++) + "]";
    Revision r;
    auto id = to_int(rev.get<std::string>("id", ""));
    if (!id) throw ParseError("missing or bad revision id", loc + "/id");
    r.rev_id = *id;
    if (auto p = rev.get_optional<std::string>("parentid")) {
      auto v = to_int(*p);
      if (!v) throw ParseError("bad parentid", loc + "/parentid");
      r.parent_id = *v;
    }
    auto ts = rev.get_optional<std::string>("timestamp");
    if (!ts) throw ParseError("missing field", loc + "/timestamp");
    try {
      r.timestamp = parse_timestamp(*ts);
    } catch (const ParseError&) {
      throw ParseError("bad timestamp", loc + "/timestamp");
    }
    if (auto u = rev.get_optional<std::string>("contributor.username")) r.user_key = *u;
    else if (auto ip = rev.get_optional<std::string>("contributor.ip")) r.user_key = *ip;
    else r.user_key = "(hidden)";
    r.comment = rev.get<std::string>("comment", "");
    r.is_minor = rev.get_child_optional("minor").has_value();
    r.content_hash = normalize_dump_sha1(rev.get<std::string>("sha1", ""));
    for (const auto& [tn, tv] : rev)
      if (tn == "tag") r.tags.insert(tv.get_value<std::string>());
    auto text = rev.get_child_optional("text");
    if (!text) throw ParseError("missing field", loc + "/text");
    auto bytes = to_int(text->get<std::string>("<xmlattr>.bytes", ""));
    if (!bytes) throw ParseError("missing or bad bytes attribute", loc + "/text@bytes");
    r.byte_size = *bytes;
    auto body = text->get_value<std::string>();
    if (!text->get_child_optional("<xmlattr>.deleted") && !body.empty()) r.text = body;
    h.revisions.push_back(std::move(r));
  }
  return h;
}

pt::ptree read_dump(std::string_view raw) {
  pt::ptree tree;
  std::istringstream in{std::string(raw)};
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("invalid XML: ") + e.message(), "line " + std::to_string(e.line()));
  }
  return tree;
}

}  // namespace

std::vector<PageHistory> parse_dump_pages(std::string_view raw, const BotPolicy& policy) {
  auto tree = read_dump(raw);
  auto root = tree.get_child_optional("mediawiki");
  if (!root) throw ParseError("missing root element", "mediawiki");
  std::vector<PageHistory> pages;
  std::size_t k = 0;
  for (const auto& [name, page] : *root) {
    if (name != "page") continue;
    auto h = parse_dump_page(page, k++);
    canonicalize(h, policy, true);
    pages.push_back(std::move(h));
  }
  return pages;
}

PageHistory parse_history(std::string_view raw, HistoryFormat format, const BotPolicy& policy) {
  PageHistory h;
  bool derive = true;
  switch (format) {
    case HistoryFormat::FixtureCsv:
      h = parse_fixture_csv(raw);
      derive = false;
      break;
    case HistoryFormat::ApiJson:
      h = parse_api_json(raw);
      break;
    case HistoryFormat::DumpXml: {
      auto tree = read_dump(raw);
      auto page = tree.get_child_optional("mediawiki.page");
      if (!page) throw ParseError("missing element", "mediawiki/page");
      h = parse_dump_page(*page, 0);
      break;
    }
  }
  canonicalize(h, policy, derive);
  return h;
}

std::string write_fixture_csv(const PageHistory& h) {
  std::string out;
  out += csv::kSchemaLine;
  out += "\n# page_id=" + std::to_string(h.page_id) + "\n";
  out += "# title=" + h.title + "\n";
  out += kFixtureCsvHeader;
  out += "\n";
  for (const auto& r : h.revisions) {
    std::string tags;
    for (const auto& t : r.tags) {
      if (!tags.empty()) tags += ';';
      tags += t;
    }
    out += csv::join({std::to_string(r.rev_id), r.parent_id ? std::to_string(*r.parent_id) : "",
                      format_timestamp(r.timestamp), r.user_key, r.content_hash, std::to_string(r.byte_size),
                      std::to_string(r.size_delta), r.comment, tags, r.is_minor ? "1" : "0"});
    out += "\n";
  }
  return out;
}

}  // namespace editdyn
