#pragma once

// Revision-history acquisition: MediaWiki API client, dump/fixture parsers
// and the canonical page timeline every later stage consumes.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace editdyn {

// UTC seconds since the Unix epoch.
using Timestamp = std::int64_t;

struct Revision {
  std::int64_t rev_id = 0;
  std::optional<std::int64_t> parent_id;  // absent for the first revision
  Timestamp timestamp = 0;
  std::string user_key;
  std::string content_hash;  // hex digest of the page text after the edit
  std::int64_t byte_size = 0;
  std::int64_t size_delta = 0;
  std::string comment;
  std::set<std::string> tags;
  bool is_minor = false;
  bool is_bot = false;
  // Full page text after the edit, when the source carried it.
  std::optional<std::string> text;

  bool operator==(const Revision&) const = default;
};

struct PageHistory {
  std::int64_t page_id = 0;
  std::string title;
  std::vector<Revision> revisions;  // ascending by (timestamp, rev_id)
  std::int64_t article_length = 0;

  bool operator==(const PageHistory&) const = default;
};

enum class HistoryFormat { ApiJson, DumpXml, FixtureCsv };

std::string_view to_string(HistoryFormat format);
// Guess the format from a file extension (.json, .xml, .csv).
std::optional<HistoryFormat> format_from_path(const std::filesystem::path& path);

// Overrides for the bot-name heuristic. Names are compared case-insensitively.
struct BotPolicy {
  std::set<std::string> force_bot;
  std::set<std::string> force_human;

  // Lines of the form "bot <name>" or "human <name>"; '#' starts a comment.
  static BotPolicy load(const std::filesystem::path& path);
};

// True for IPv4/IPv6 address keys and temporary-account keys ("~2024-...").
bool is_anonymous(std::string_view user_key);

// Platform bot marker in `flags`, or a registered account whose name has a
// word ending in "bot" (ClueBot NG, SineBot, AnomieBOT).
bool classify_bot(std::string_view user_key, const std::set<std::string>& flags,
                  const BotPolicy& policy = {});

// Parse a whole document. api-json accepts one query response or a JSON array
// of paginated responses; dump-xml takes the first <page>. Rows are re-sorted
// and size deltas derived where the source does not carry them.
PageHistory parse_history(std::string_view raw, HistoryFormat format,
                          const BotPolicy& policy = {});

// Every page of a dump-xml document.
std::vector<PageHistory> parse_dump_pages(std::string_view raw, const BotPolicy& policy = {});

// Sorts, rejects duplicate rev_ids, derives missing deltas, fills
// article_length and resolves bot flags. Throws ParseError("empty history").
void canonicalize(PageHistory& history, const BotPolicy& policy, bool derive_deltas);

// fixture-csv serialization with `# key=value` page metadata lines. Texts are
// not written.
std::string write_fixture_csv(const PageHistory& history);

inline constexpr std::string_view kFixtureCsvHeader =
    "rev_id,parent_id,timestamp,user_key,content_hash,byte_size,size_delta,comment,tags,is_minor";

// --- MediaWiki Action API client ------------------------------------------

inline constexpr std::string_view kDefaultEndpoint = "https://en.wikipedia.org/w/api.php";
inline constexpr const char* kEndpointEnvVar = "EDITDYN_API_URL";

// $EDITDYN_API_URL when set, otherwise the English Wikipedia endpoint.
std::string default_endpoint();

// Content-addressed store of raw API responses keyed by
// (endpoint, title, continuation token). Writes are atomic renames.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  static std::string key(std::string_view endpoint, std::string_view title,
                         std::string_view continuation);
  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, std::string_view body) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& key) const;
  std::filesystem::path dir_;
};

struct FetchOptions {
  std::string endpoint = default_endpoint();
  int page_limit = 5000;
  bool offline = false;  // serve from cache only
  std::optional<std::filesystem::path> cache_dir;
  int max_attempts = 3;
  std::chrono::milliseconds backoff{500};
  bool with_content = false;  // also request page text (smaller batches)
  std::chrono::seconds timeout{30};
  BotPolicy bots;
};

// Fetch up to `page_limit` revisions oldest-first, following continuation.
// Throws NotFoundError, TransportError, ParseError or OfflineError.
PageHistory fetch_history(const std::string& title, const FetchOptions& options);

// --- timestamps -------------------------------------------------------------

// "2001-01-15T12:00:00Z" (or bare integer seconds) to epoch seconds.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

}  // namespace editdyn
