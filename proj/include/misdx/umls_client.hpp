#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "misdx/canonicalizer.hpp"
#include "misdx/errors.hpp"
#include "misdx/text.hpp"

namespace misdx {

struct RemoteFetchOptions {
    std::string base_url = "https://uts-ws.nlm.nih.gov/rest";
    std::string version = "current";
    std::string cache_path;  // empty disables the cache
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{250};
    double backoff_multiplier = 2.0;
    std::chrono::milliseconds max_backoff{4000};
    int page_size = 100;
};

struct RemoteFetchResult {
    std::vector<RelationRow> rows;
    std::map<std::string, std::string> failures;  // CUI -> error description
    std::size_t served_from_cache = 0;
    std::size_t requests_made = 0;
};

namespace detail {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix, no trailing slash
};

inline SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("base URL must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

// Tail segment of a UTS resource URI ("https://.../CUI/C0007097" -> C0007097).
inline std::string uri_tail(const std::string& uri) {
    auto slash = uri.find_last_of('/');
    return slash == std::string::npos ? uri : uri.substr(slash + 1);
}

// The service vocabulary uses SY for synonymy; the relations files use SYN.
inline std::optional<RelCode> service_rel_code(const std::string& label) {
    if (label == "SY") return RelCode::syn;
    return parse_rel_code(label);
}

using RelationCache = std::map<std::string, std::vector<RelationRow>>;

inline RelationCache load_relation_cache(const std::string& path) {
    RelationCache cache;
    std::ifstream in(path, std::ios::binary);
    if (!in) return cache;
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return cache;
    for (const auto& [cui, rows] : j.items()) {
        auto& list = cache[cui];
        for (const auto& row : rows) {
            if (!row.is_array() || row.size() != 3) continue;
            auto code = parse_rel_code(row[1].get<std::string>());
            if (!code) continue;
            list.push_back(RelationRow{row[0].get<std::string>(), *code, row[2].get<std::string>()});
        }
    }
    return cache;
}

inline void save_relation_cache(const std::string& path, const RelationCache& cache) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [cui, rows] : cache) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& r : rows) list.push_back({r.cui_a, to_string(r.rel), r.cui_b});
        j[cui] = std::move(list);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write relations cache '" + path + "'");
    out << j.dump(2) << '\n';
}

}  // namespace detail

// Fetches parent/child and synonymy relations for each CUI from a UMLS-style
// terminology service. Results are cached to a local JSON file so repeat
// runs stay offline; transient failures back off and retry, and per-CUI
// errors leave the rest of the result usable. The API key is sent as a
// query parameter and never logged.
inline RemoteFetchResult fetch_relations_remote(const std::set<std::string>& cuis,
                                                const std::string& api_key,
                                                const RemoteFetchOptions& options = {}) {
    RemoteFetchResult result;
    if (cuis.empty()) return result;

    detail::RelationCache cache;
    if (!options.cache_path.empty()) cache = detail::load_relation_cache(options.cache_path);

    std::vector<std::string> to_fetch;
    for (const auto& cui : cuis) {
        if (cache.contains(cui))
            ++result.served_from_cache;
        else
            to_fetch.push_back(cui);
    }

    if (!to_fetch.empty()) {
        auto url = detail::split_url(options.base_url);
        httplib::Client client(url.origin);
        client.set_connection_timeout(30);
        client.set_read_timeout(30);

        for (const auto& cui : to_fetch) {
            std::vector<RelationRow> rows;
            std::string error;
            int page = 1, page_count = 1;
            while (page <= page_count) {
                std::string path = url.prefix + "/content/" + options.version + "/CUI/" + cui +
                                   "/relations?apiKey=" + api_key + "&pageNumber=" + std::to_string(page) +
                                   "&pageSize=" + std::to_string(options.page_size);
                auto delay = options.initial_backoff;
                httplib::Result res;
                for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
                    ++result.requests_made;
                    res = client.Get(path);
                    bool retryable = !res || res->status == 429 || res->status >= 500;
                    if (!retryable) break;
                    if (attempt == options.max_attempts) break;
                    std::this_thread::sleep_for(delay);
                    delay = std::min(std::chrono::milliseconds(static_cast<long>(
                                         static_cast<double>(delay.count()) * options.backoff_multiplier)),
                                     options.max_backoff);
                }
                if (!res) {
                    error = "connection failed";
                    break;
                }
                if (res->status == 404) break;  // no relations for this concept
                if (res->status == 401 || res->status == 403) {
                    error = "authentication failed (HTTP " + std::to_string(res->status) + ")";
                    break;
                }
                if (res->status != 200) {
                    error = "HTTP " + std::to_string(res->status);
                    break;
                }
                nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
                if (j.is_discarded()) {
                    error = "malformed JSON response";
                    break;
                }
                page_count = j.value("pageCount", 1);
                for (const auto& item : j.value("result", nlohmann::json::array())) {
                    auto code = detail::service_rel_code(item.value("relationLabel", ""));
                    if (!code) continue;
                    std::string related = detail::uri_tail(item.value("relatedId", ""));
                    if (!is_valid_cui(related) || related == cui) continue;
                    // The service reports how `related` stands to the queried
                    // concept, matching the file convention "related REL cui".
                    rows.push_back(RelationRow{related, *code, cui});
                }
                ++page;
            }
            if (!error.empty()) {
                result.failures[cui] = error;
            } else {
                std::sort(rows.begin(), rows.end());
                rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
                cache[cui] = std::move(rows);
            }
        }
        if (!options.cache_path.empty()) detail::save_relation_cache(options.cache_path, cache);
    }

    for (const auto& cui : cuis) {
        auto it = cache.find(cui);
        if (it == cache.end()) continue;
        result.rows.insert(result.rows.end(), it->second.begin(), it->second.end());
    }
    std::sort(result.rows.begin(), result.rows.end());
    result.rows.erase(std::unique(result.rows.begin(), result.rows.end()), result.rows.end());
    return result;
}

}  // namespace misdx
