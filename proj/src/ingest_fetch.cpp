#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "editdyn/error.hpp"
#include "editdyn/ingest.hpp"

namespace editdyn {

using nlohmann::json;
namespace fs = std::filesystem;

std::string default_endpoint() {
  if (const char* env = std::getenv(kEndpointEnvVar); env && *env) return env;
  return std::string(kDefaultEndpoint);
}

// --- cache -------------------------------------------------------------------

namespace {

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(digits[md[i] >> 4]);
    out.push_back(digits[md[i] & 0xF]);
  }
  return out;
}

}  // namespace

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

std::string ResponseCache::key(std::string_view endpoint, std::string_view title, std::string_view continuation) {
  std::string material;
  material.append(endpoint).push_back('\n');
  material.append(title).push_back('\n');
  material.append(continuation);
  return sha256_hex(material);
}

fs::path ResponseCache::path_for(const std::string& key) const { return dir_ / (key + ".json"); }

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ResponseCache::put(const std::string& key, std::string_view body) const {
  static std::atomic<unsigned> counter{0};
  auto final_path = path_for(key);
  auto tmp = final_path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache file " + tmp.string());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw Error("cannot write cache file " + tmp.string());
  }
  fs::rename(tmp, final_path);
}

// --- client ------------------------------------------------------------------

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error("endpoint must be an absolute URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class ApiSession {
 public:
  explicit ApiSession(const FetchOptions& opt) : opt_(opt), ep_(split_endpoint(opt.endpoint)) {}

  std::string get(const httplib::Params& params) {
    if (opt_.offline) throw OfflineError();
    if (!client_) {
      client_ = std::make_unique<httplib::Client>(ep_.origin);
      client_->set_follow_location(true);
      client_->set_connection_timeout(opt_.timeout);
      client_->set_read_timeout(opt_.timeout);
      client_->set_default_headers({{"User-Agent", "edit-dynamics/1.0 (research toolkit)"}});
    }
    std::string last_error;
    int attempts = 0;
    for (int attempt = 1; attempt <= std::max(1, opt_.max_attempts); ++attempt) {
      attempts = attempt;
      auto res = client_->Get(ep_.path, params, httplib::Headers{});
      if (res && res->status == 200) return res->body;
      if (!res) {
        last_error = "transport failure: " + httplib::to_string(res.error());
      } else {
        last_error = "HTTP " + std::to_string(res->status);
        bool retryable = res->status == 429 || res->status >= 500;
        if (!retryable) break;
      }
      if (attempt < opt_.max_attempts) std::this_thread::sleep_for(opt_.backoff * attempt);
    }
    throw TransportError(last_error + " from " + opt_.endpoint, attempts);
  }

 private:
  const FetchOptions& opt_;
  Endpoint ep_;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace

PageHistory fetch_history(const std::string& title, const FetchOptions& opt) {
  if (title.empty()) throw Error("title must not be empty");
  if (opt.page_limit < 1) throw Error("page_limit must be positive");
  std::optional<ResponseCache> cache;
  if (opt.cache_dir) cache.emplace(*opt.cache_dir);
  ApiSession session(opt);

  json responses = json::array();
  std::size_t fetched = 0;
  json cont = json::object();
  std::string token;
  for (;;) {
    std::string body;
    auto key = ResponseCache::key(opt.endpoint, title, token);
    if (auto hit = cache ? cache->get(key) : std::nullopt) {
      body = std::move(*hit);
    } else {
      const int batch_max = opt.with_content ? 50 : 500;
      int remaining = opt.page_limit - static_cast<int>(fetched);
      httplib::Params params{{"action", "query"},
                             {"prop", "revisions"},
                             {"titles", title},
                             {"rvprop", std::string("ids|timestamp|user|sha1|size|comment|tags|flags") +
                                            (opt.with_content ? "|content" : "")},
                             {"rvlimit", std::to_string(std::min(batch_max, remaining))},
                             {"rvdir", "newer"},
                             {"format", "json"},
                             {"formatversion", "2"}};
      if (opt.with_content) params.emplace("rvslots", "main");
      if (cont.empty()) params.emplace("continue", "");
      for (const auto& [k, v] : cont.items()) params.emplace(k, v.is_string() ? v.get<std::string>() : v.dump());
      body = session.get(params);
      // Validate before caching so a bad payload is not replayed forever.
      try {
        if (json::parse(body).is_discarded()) throw ParseError("invalid JSON from API", "response body");
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON from API: ") + e.what(), "response body");
      }
      if (cache) cache->put(key, body);
    }

    json doc;
    try {
      doc = json::parse(body);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), "response body");
    }
    if (doc.contains("query") && doc["query"].contains("pages")) {
      const auto& pages = doc["query"]["pages"];
      const json* page = pages.is_array() && !pages.empty() ? &pages[0] : nullptr;
      if (page && page->contains("revisions") && (*page)["revisions"].is_array())
        fetched += (*page)["revisions"].size();
    }
    responses.push_back(doc);

    if (!doc.contains("continue") || fetched >= static_cast<std::size_t>(opt.page_limit)) break;
    cont = doc["continue"];
    if (!cont.is_object()) throw ParseError("continue is not an object", "$.continue");
    token = cont.contains("rvcontinue") ? cont["rvcontinue"].get<std::string>() : cont.dump();
  }

  auto history = parse_history(responses.dump(), HistoryFormat::ApiJson, opt.bots);
  if (history.revisions.size() > static_cast<std::size_t>(opt.page_limit)) {
    history.revisions.resize(static_cast<std::size_t>(opt.page_limit));
    history.article_length = history.revisions.back().byte_size;
  }
  return history;
}

}  // namespace editdyn
