#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "misdx/errors.hpp"
#include "misdx/pair_extractor.hpp"
#include "misdx/text.hpp"

namespace misdx {

enum class RelCode { par, chd, rb, rn, syn, rl };

inline const char* to_string(RelCode r) {
    switch (r) {
        case RelCode::par: return "PAR";
        case RelCode::chd: return "CHD";
        case RelCode::rb: return "RB";
        case RelCode::rn: return "RN";
        case RelCode::syn: return "SYN";
        case RelCode::rl: return "RL";
    }
    return "?";
}

inline std::optional<RelCode> parse_rel_code(std::string_view s) {
    if (s == "PAR") return RelCode::par;
    if (s == "CHD") return RelCode::chd;
    if (s == "RB") return RelCode::rb;
    if (s == "RN") return RelCode::rn;
    if (s == "SYN") return RelCode::syn;
    if (s == "RL") return RelCode::rl;
    return std::nullopt;
}

// Direction convention: "A PAR B" means A is the parent of B, "A CHD B"
// means A is a child of B. RB behaves as PAR and RN as CHD. SYN and RL are
// symmetric.
struct RelationRow {
    std::string cui_a;
    RelCode rel = RelCode::syn;
    std::string cui_b;

    friend bool operator==(const RelationRow&, const RelationRow&) = default;
    friend auto operator<=>(const RelationRow& x, const RelationRow& y) {
        return std::tie(x.cui_a, x.rel, x.cui_b) <=> std::tie(y.cui_a, y.rel, y.cui_b);
    }
};

// Relations file: TSV cui_a<TAB>rel<TAB>cui_b, no header. '#'-prefixed
// comment lines and blank lines are ignored; duplicate rows are removed.
inline std::vector<RelationRow> load_relations(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open relations file '" + path + "'");

    std::vector<RelationRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;

        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos)
            throw LoadError(path, lineno, "expected 3 tab-separated columns");

        std::string a = line.substr(0, t1);
        std::string rel = line.substr(t1 + 1, t2 - t1 - 1);
        std::string b = line.substr(t2 + 1);
        if (!is_valid_cui(a)) throw LoadError(path, lineno, "malformed CUI '" + a + "'");
        if (!is_valid_cui(b)) throw LoadError(path, lineno, "malformed CUI '" + b + "'");
        auto code = parse_rel_code(rel);
        if (!code) throw LoadError(path, lineno, "unknown relation code '" + rel + "'");
        if (a == b) throw LoadError(path, lineno, "self-relation on " + a);
        rows.push_back(RelationRow{std::move(a), *code, std::move(b)});
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return rows;
}

struct CanonicalOptions {
    // Collapse parent chains to the topmost extracted ancestor. When off,
    // children map one hop only and the final map is not idempotent.
    bool transitive_parents = true;
    // Apply synonym components before parent collapse (sensitivity mode;
    // the default order is parents first).
    bool synonyms_before_parents = false;
};

struct CanonicalMap {
    std::map<std::string, std::string> mapping;            // total over the extracted set
    std::map<std::string, std::size_t> first_appearance;   // CUI -> selected-title ordinal

    const std::string& canonical(const std::string& cui) const {
        auto it = mapping.find(cui);
        if (it == mapping.end())
            throw Error("CUI " + cui + " missing from canonical map (pipeline inconsistency)");
        return it->second;
    }
};

struct CanonicalPair {
    std::string source_cui;
    std::string dest_cui;
    std::string pmid;
    bool self_loop = false;
};

namespace detail {

// One parent-collapse pass over the representatives of `pre`. Every child
// with extracted parents points at its lowest-numbered parent; chains then
// collapse to the topmost ancestor, and cycles collapse to their
// lowest-numbered member.
inline std::map<std::string, std::string> parent_stage(
    const std::map<std::string, std::string>& pre,
    const std::vector<std::pair<std::string, std::string>>& parent_child_edges, bool transitive) {
    std::map<std::string, std::string> parent_of;  // child -> chosen parent
    {
        std::map<std::string, std::string> best;
        for (const auto& [parent, child] : parent_child_edges) {
            const std::string& p = pre.at(parent);
            const std::string& c = pre.at(child);
            if (p == c) continue;
            auto [it, inserted] = best.emplace(c, p);
            if (!inserted && cui_number(p) < cui_number(it->second)) it->second = p;
        }
        parent_of = std::move(best);
    }

    std::map<std::string, std::string> resolved;
    if (!transitive) {
        for (const auto& [cui, rep] : pre) {
            auto it = parent_of.find(rep);
            resolved[cui] = it == parent_of.end() ? rep : it->second;
        }
        return resolved;
    }

    // root() with cycle handling, memoized in `root_of`.
    std::map<std::string, std::string> root_of;
    auto resolve_root = [&](const std::string& start) -> const std::string& {
        std::vector<std::string> path;
        std::map<std::string, std::size_t> on_path;
        std::string cur = start;
        std::string root;
        while (true) {
            if (auto it = root_of.find(cur); it != root_of.end()) {
                root = it->second;
                break;
            }
            if (auto it = on_path.find(cur); it != on_path.end()) {
                // Cycle: everything from the first visit of `cur` onward.
                root = cur;
                for (std::size_t i = it->second; i < path.size(); ++i)
                    if (cui_number(path[i]) < cui_number(root)) root = path[i];
                break;
            }
            on_path[cur] = path.size();
            path.push_back(cur);
            auto pit = parent_of.find(cur);
            if (pit == parent_of.end()) {
                root = cur;
                break;
            }
            cur = pit->second;
        }
        for (const auto& node : path) root_of[node] = root;
        return root_of[start];
    };

    for (const auto& [cui, rep] : pre) resolved[cui] = resolve_root(rep);
    return resolved;
}

// Synonym components over the representatives of `pre`; each component maps
// to its member with the smallest first-appearance ordinal (ties to the
// lowest-numbered CUI).
inline std::map<std::string, std::string> synonym_stage(
    const std::map<std::string, std::string>& pre,
    const std::vector<std::pair<std::string, std::string>>& syn_edges,
    const std::map<std::string, std::size_t>& first_appearance) {
    // Union-find over representative CUIs.
    std::map<std::string, std::string> uf;
    auto find = [&](std::string x) {
        while (true) {
            auto it = uf.find(x);
            if (it == uf.end() || it->second == x) return x;
            x = it->second;
        }
    };
    for (const auto& [a, b] : syn_edges) {
        std::string ra = find(pre.at(a)), rb = find(pre.at(b));
        if (ra != rb) uf[std::move(ra)] = rb;
    }

    std::map<std::string, std::vector<std::string>> components;
    for (const auto& [cui, rep] : pre) components[find(rep)].push_back(rep);

    auto ordinal = [&](const std::string& cui) {
        auto it = first_appearance.find(cui);
        return it == first_appearance.end() ? std::numeric_limits<std::size_t>::max() : it->second;
    };

    std::map<std::string, std::string> component_rep;
    for (auto& [key, members] : components) {
        std::string best = members.front();
        for (const auto& m : members) {
            auto mo = ordinal(m), bo = ordinal(best);
            if (mo < bo || (mo == bo && cui_number(m) < cui_number(best))) best = m;
        }
        component_rep[key] = std::move(best);
    }

    std::map<std::string, std::string> resolved;
    for (const auto& [cui, rep] : pre) resolved[cui] = component_rep.at(find(rep));
    return resolved;
}

}  // namespace detail

// Builds the canonical mapping per the parent/synonym collapse rules. Only
// relations whose endpoints are BOTH in the extracted set participate;
// everything else is ignored. The result is total over `extracted`, never
// maps outside it, and is idempotent in the default (transitive) mode.
inline CanonicalMap build_canonical_map(const std::set<std::string>& extracted,
                                        const std::map<std::string, std::size_t>& first_appearance,
                                        std::span<const RelationRow> relations,
                                        const CanonicalOptions& options = {}) {
    std::vector<std::pair<std::string, std::string>> parent_child;  // (parent, child)
    std::vector<std::pair<std::string, std::string>> synonyms;
    for (const RelationRow& row : relations) {
        if (!extracted.contains(row.cui_a) || !extracted.contains(row.cui_b)) continue;
        switch (row.rel) {
            case RelCode::par:
            case RelCode::rb: parent_child.emplace_back(row.cui_a, row.cui_b); break;
            case RelCode::chd:
            case RelCode::rn: parent_child.emplace_back(row.cui_b, row.cui_a); break;
            case RelCode::syn:
            case RelCode::rl: synonyms.emplace_back(row.cui_a, row.cui_b); break;
        }
    }
    std::sort(parent_child.begin(), parent_child.end());
    parent_child.erase(std::unique(parent_child.begin(), parent_child.end()), parent_child.end());
    std::sort(synonyms.begin(), synonyms.end());
    synonyms.erase(std::unique(synonyms.begin(), synonyms.end()), synonyms.end());

    std::map<std::string, std::string> mapping;
    for (const auto& cui : extracted) mapping[cui] = cui;

    if (options.synonyms_before_parents) {
        mapping = detail::synonym_stage(mapping, synonyms, first_appearance);
        mapping = detail::parent_stage(mapping, parent_child, options.transitive_parents);
    } else {
        mapping = detail::parent_stage(mapping, parent_child, options.transitive_parents);
        mapping = detail::synonym_stage(mapping, synonyms, first_appearance);
    }

    if (options.transitive_parents) {
        // Path-compress to a fixpoint; bounded by |extracted| steps.
        for (auto& [cui, rep] : mapping) {
            std::string cur = rep;
            for (std::size_t guard = 0; guard <= mapping.size(); ++guard) {
                const std::string& next = mapping.at(cur);
                if (next == cur) break;
                cur = next;
            }
            rep = cur;
        }
    }

    CanonicalMap out;
    out.mapping = std::move(mapping);
    out.first_appearance = std::map<std::string, std::size_t>(first_appearance.begin(), first_appearance.end());
    return out;
}

// Replaces both endpoints with their canonical representatives; flags the
// pair when they collide.
inline CanonicalPair apply_map(const CanonicalMap& map, const RawPair& pair) {
    const std::string& s = map.canonical(pair.source_cui);
    const std::string& d = map.canonical(pair.dest_cui);
    return CanonicalPair{s, d, pair.pmid, s == d};
}

}  // namespace misdx
