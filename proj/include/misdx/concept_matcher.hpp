#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "misdx/errors.hpp"
#include "misdx/text.hpp"

namespace misdx {

inline const std::set<std::string> kDefaultAllowedTuis = {"T047", "T191"};

struct MatcherParams {
    std::size_t gram_size = 3;
    std::size_t max_window_tokens = 5;
    double threshold = 0.7;  // minimum Jaccard similarity, in (0, 1]
};

struct DictionaryEntry {
    std::string cui;              // C + 7 digits
    std::string tui;              // semantic type, e.g. T047
    std::string term;             // as listed in the dictionary file
    std::string preferred_term;   // display name for the CUI
    std::string normalized_term;  // lowercased, whitespace-collapsed
};

struct ConceptMatch {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string matched_text;  // title substring, verbatim
    std::string cui;
    std::string preferred_term;
    double similarity = 0.0;
    std::string tui;
};

struct MatchGroup {
    ConceptMatch winner;
    std::size_t span_start = 0;  // min start over the group's candidates
    std::size_t span_end = 0;    // max end over the group's candidates
};

// Character n-grams of a normalized string, as a sorted unique vector.
// Strings shorter than n yield the whole string as a single gram.
inline std::vector<std::string> gram_set(std::string_view text, std::size_t n) {
    std::vector<std::string> grams;
    if (text.size() < n) {
        grams.emplace_back(text);
        return grams;
    }
    grams.reserve(text.size() - n + 1);
    for (std::size_t i = 0; i + n <= text.size(); ++i) grams.emplace_back(text.substr(i, n));
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    return grams;
}

// |a ∩ b| / |a ∪ b| over sorted unique gram vectors.
inline double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::size_t inter = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        int cmp = a[i].compare(b[j]);
        if (cmp == 0) {
            ++inter;
            ++i;
            ++j;
        } else if (cmp < 0) {
            ++i;
        } else {
            ++j;
        }
    }
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

namespace detail {

// Total order used for match lists. The spec'd keys are (start asc, end
// desc, cui asc); the remaining fields make the order total so results are
// permutation- and accelerator-independent.
inline bool match_list_less(const ConceptMatch& a, const ConceptMatch& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end > b.end;
    if (a.cui != b.cui) return a.cui < b.cui;
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.preferred_term != b.preferred_term) return a.preferred_term < b.preferred_term;
    return a.tui < b.tui;
}

// Disambiguation order: longest match, then greatest similarity, then the
// CUI with the lowest 7-digit number. Trailing keys only break exact ties.
inline bool winner_better(const ConceptMatch& a, const ConceptMatch& b) {
    const std::size_t la = a.end - a.start, lb = b.end - b.start;
    if (la != lb) return la > lb;
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    const std::uint32_t na = cui_number(a.cui), nb = cui_number(b.cui);
    if (na != nb) return na < nb;
    if (a.preferred_term != b.preferred_term) return a.preferred_term < b.preferred_term;
    if (a.tui != b.tui) return a.tui < b.tui;
    if (a.start != b.start) return a.start < b.start;
    return a.end < b.end;
}

}  // namespace detail

// Dictionary of disease terms with an n-gram inverted index. The index is
// purely an accelerator: matching results are defined by (and tested
// against) the brute-force scan over all candidate spans and all entries.
class DictionaryIndex {
public:
    DictionaryIndex(std::vector<DictionaryEntry> entries, MatcherParams params)
        : entries_(std::move(entries)), params_(params) {
        if (!(params_.threshold > 0.0 && params_.threshold <= 1.0))
            throw ConfigError("similarity threshold must be in (0, 1]");
        if (params_.gram_size < 2) throw ConfigError("gram size must be at least 2");
        if (params_.max_window_tokens < 1) throw ConfigError("token window must be at least 1");
        if (entries_.empty()) throw LoadError("no usable dictionary entries");

        std::sort(entries_.begin(), entries_.end(), [](const DictionaryEntry& a, const DictionaryEntry& b) {
            return std::tie(a.cui, a.normalized_term, a.preferred_term, a.tui) <
                   std::tie(b.cui, b.normalized_term, b.preferred_term, b.tui);
        });

        gram_counts_.resize(entries_.size());
        for (std::uint32_t id = 0; id < entries_.size(); ++id) {
            auto grams = gram_set(entries_[id].normalized_term, params_.gram_size);
            gram_counts_[id] = grams.size();
            for (auto& g : grams) postings_[std::move(g)].push_back(id);
        }
    }

    const std::vector<DictionaryEntry>& entries() const noexcept { return entries_; }
    const MatcherParams& params() const noexcept { return params_; }

    // All (span, entry) matches at or above the similarity threshold, where
    // spans are windows of 1..max_window_tokens consecutive tokens. Sorted
    // by (start asc, end desc, cui asc, ...).
    std::vector<ConceptMatch> match(std::string_view title) const {
        std::vector<ConceptMatch> out;
        const auto tokens = tokenize(title);
        std::vector<std::uint32_t> overlap(entries_.size(), 0);
        std::vector<std::uint32_t> touched;

        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const std::size_t max_w = std::min(params_.max_window_tokens, tokens.size() - i);
            for (std::size_t w = 1; w <= max_w; ++w) {
                const std::size_t start = tokens[i].start;
                const std::size_t end = tokens[i + w - 1].end;
                const std::string norm = normalize_term(title.substr(start, end - start));
                const auto grams = gram_set(norm, params_.gram_size);

                touched.clear();
                for (const auto& g : grams) {
                    auto it = postings_.find(g);
                    if (it == postings_.end()) continue;
                    for (std::uint32_t id : it->second) {
                        if (overlap[id]++ == 0) touched.push_back(id);
                    }
                }
                for (std::uint32_t id : touched) {
                    const std::uint32_t inter = overlap[id];
                    overlap[id] = 0;
                    const double sim = static_cast<double>(inter) /
                                       static_cast<double>(grams.size() + gram_counts_[id] - inter);
                    if (sim >= params_.threshold) {
                        const DictionaryEntry& e = entries_[id];
                        out.push_back(ConceptMatch{start, end, std::string(title.substr(start, end - start)),
                                                   e.cui, e.preferred_term, sim, e.tui});
                    }
                }
            }
        }
        std::sort(out.begin(), out.end(), detail::match_list_less);
        return out;
    }

private:
    std::vector<DictionaryEntry> entries_;
    MatcherParams params_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> postings_;
    std::vector<std::size_t> gram_counts_;
};

// Dictionary file format: UTF-8 TSV with four columns
// cui<TAB>tui<TAB>term<TAB>preferred_term, no header; '#'-prefixed comment
// lines and blank lines are ignored. Rows outside the TUI allow-list are
// dropped; duplicate (normalized term, cui) rows are deduplicated.
inline DictionaryIndex load_dictionary(const std::string& path,
                                       const std::set<std::string>& allowed_tuis = kDefaultAllowedTuis,
                                       MatcherParams params = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dictionary '" + path + "'");

    std::vector<DictionaryEntry> entries;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;

        std::vector<std::string> cols;
        std::size_t pos = 0;
        while (true) {
            std::size_t tab = line.find('\t', pos);
            cols.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
            if (tab == std::string::npos) break;
            pos = tab + 1;
        }
        if (cols.size() != 4)
            throw LoadError(path, lineno, "expected 4 tab-separated columns, found " + std::to_string(cols.size()));
        if (!is_valid_cui(cols[0])) throw LoadError(path, lineno, "malformed CUI '" + cols[0] + "'");
        if (cols[1].empty()) throw LoadError(path, lineno, "empty semantic type");

        std::string normalized = normalize_term(cols[2]);
        if (normalized.empty()) throw LoadError(path, lineno, "empty term");
        if (!allowed_tuis.contains(cols[1])) continue;
        if (!seen.insert(normalized + '\x1f' + cols[0]).second) continue;

        entries.push_back(DictionaryEntry{cols[0], cols[1], cols[2], cols[3], std::move(normalized)});
    }
    if (entries.empty()) throw LoadError("dictionary '" + path + "' has no usable entries");
    return DictionaryIndex(std::move(entries), params);
}

inline std::vector<ConceptMatch> match_title(const DictionaryIndex& index, std::string_view title) {
    return index.match(title);
}

// Matches whose span overlaps [cue_start, cue_end) are discarded; the cue
// phrase is never part of a disease mention.
inline std::vector<ConceptMatch> drop_cue_overlaps(std::vector<ConceptMatch> matches,
                                                   std::size_t cue_start, std::size_t cue_end) {
    std::erase_if(matches, [&](const ConceptMatch& m) { return m.start < cue_end && cue_start < m.end; });
    return matches;
}

// Partitions matches into maximal clusters under the transitive closure of
// span overlap and keeps one winner per cluster. Groups come back sorted by
// span start with pairwise disjoint spans.
inline std::vector<MatchGroup> group_and_disambiguate(std::vector<ConceptMatch> matches) {
    std::vector<MatchGroup> groups;
    if (matches.empty()) return groups;
    std::sort(matches.begin(), matches.end(), detail::match_list_less);

    MatchGroup current{matches.front(), matches.front().start, matches.front().end};
    for (std::size_t i = 1; i < matches.size(); ++i) {
        ConceptMatch& m = matches[i];
        if (m.start < current.span_end) {  // overlaps the running cluster
            current.span_end = std::max(current.span_end, m.end);
            if (detail::winner_better(m, current.winner)) current.winner = std::move(m);
        } else {
            groups.push_back(std::move(current));
            current = MatchGroup{m, m.start, m.end};
        }
    }
    groups.push_back(std::move(current));
    return groups;
}

}  // namespace misdx
