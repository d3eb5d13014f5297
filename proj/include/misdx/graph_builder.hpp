#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "misdx/canonicalizer.hpp"
#include "misdx/text.hpp"

namespace misdx {

struct EdgeStat {
    std::string source_cui;
    std::string dest_cui;
    std::uint64_t pair_count = 0;
    // pair_count / source_frequency(source). Kept alongside the exact
    // integers; file rendering goes through format_ratio_4dp.
    double weight = 0.0;

    friend bool operator==(const EdgeStat&, const EdgeStat&) = default;
};

struct NodeStat {
    std::string cui;
    std::string label;
    std::uint64_t source_frequency = 0;       // times this CUI was the correct diagnosis
    std::uint64_t destination_frequency = 0;  // times it was the wrong one
    std::uint64_t out_degree = 0;             // distinct destinations
    std::uint64_t in_degree = 0;              // distinct sources
    double out_degree_centrality = 0.0;       // out_degree / (node_count - 1)
};

// Directed misdiagnosis graph. Self-loop pairs are dropped (and counted)
// before any frequency is computed, so out-edge weights of every source sum
// to one.
struct MisdxGraph {
    std::map<std::string, NodeStat> nodes;
    std::map<std::pair<std::string, std::string>, EdgeStat> edges;
    std::uint64_t self_loops_dropped = 0;

    std::uint64_t node_count() const noexcept { return nodes.size(); }
    std::uint64_t edge_count() const noexcept { return edges.size(); }
};

inline MisdxGraph build_graph(std::span<const CanonicalPair> pairs,
                              const std::map<std::string, std::string>& labels = {}) {
    MisdxGraph g;
    for (const CanonicalPair& p : pairs) {
        if (p.source_cui == p.dest_cui) {
            ++g.self_loops_dropped;
            continue;
        }
        auto& e = g.edges[{p.source_cui, p.dest_cui}];
        if (e.pair_count == 0) {
            e.source_cui = p.source_cui;
            e.dest_cui = p.dest_cui;
        }
        ++e.pair_count;
    }

    auto label_of = [&](const std::string& cui) {
        auto it = labels.find(cui);
        return it == labels.end() ? cui : it->second;
    };

    for (const auto& [key, e] : g.edges) {
        auto& src = g.nodes.try_emplace(e.source_cui, NodeStat{e.source_cui, label_of(e.source_cui)}).first->second;
        auto& dst = g.nodes.try_emplace(e.dest_cui, NodeStat{e.dest_cui, label_of(e.dest_cui)}).first->second;
        src.source_frequency += e.pair_count;
        dst.destination_frequency += e.pair_count;
        ++src.out_degree;
        ++dst.in_degree;
    }

    for (auto& [key, e] : g.edges)
        e.weight = static_cast<double>(e.pair_count) /
                   static_cast<double>(g.nodes.at(e.source_cui).source_frequency);

    const std::uint64_t n = g.node_count();
    for (auto& [cui, node] : g.nodes)
        node.out_degree_centrality =
            n > 1 ? static_cast<double>(node.out_degree) / static_cast<double>(n - 1) : 0.0;

    return g;
}

struct SourceRanking {
    NodeStat node;
    EdgeStat best_out_edge;  // maximum weight; ties by pair count, then dest CUI
};

struct DestinationRanking {
    NodeStat node;
    EdgeStat best_in_edge;      // maximizes pair_count / destination_frequency
    double best_in_weight = 0;  // that ratio (the denominator is the destination's frequency)
};

struct ReversePairEntry {
    std::string source_cui;
    std::string best_dest_cui;
    std::optional<double> reverse_weight;  // weight of (best_dest -> source), if that edge exists
};

// Most commonly misdiagnosed diseases: nodes with at least one out-edge,
// by source frequency. Each row carries the destination it is most often
// mistaken for.
inline std::vector<SourceRanking> top_sources(const MisdxGraph& g, std::size_t k) {
    std::vector<const NodeStat*> nodes;
    for (const auto& [cui, node] : g.nodes)
        if (node.out_degree > 0) nodes.push_back(&node);
    std::sort(nodes.begin(), nodes.end(), [](const NodeStat* a, const NodeStat* b) {
        if (a->source_frequency != b->source_frequency) return a->source_frequency > b->source_frequency;
        return cui_number(a->cui) < cui_number(b->cui);
    });
    if (nodes.size() > k) nodes.resize(k);

    std::vector<SourceRanking> out;
    out.reserve(nodes.size());
    for (const NodeStat* node : nodes) {
        const EdgeStat* best = nullptr;
        for (auto it = g.edges.lower_bound({node->cui, ""}); it != g.edges.end() && it->first.first == node->cui; ++it) {
            const EdgeStat& e = it->second;
            if (!best || e.pair_count > best->pair_count ||
                (e.pair_count == best->pair_count && e.dest_cui < best->dest_cui))
                best = &e;
        }
        out.push_back(SourceRanking{*node, *best});
    }
    return out;
}

// Diseases most often given as the wrong diagnosis, by destination
// frequency. Each row carries the most frequent correct diagnosis.
inline std::vector<DestinationRanking> top_destinations(const MisdxGraph& g, std::size_t k) {
    std::vector<const NodeStat*> nodes;
    for (const auto& [cui, node] : g.nodes)
        if (node.in_degree > 0) nodes.push_back(&node);
    std::sort(nodes.begin(), nodes.end(), [](const NodeStat* a, const NodeStat* b) {
        if (a->destination_frequency != b->destination_frequency)
            return a->destination_frequency > b->destination_frequency;
        return cui_number(a->cui) < cui_number(b->cui);
    });
    if (nodes.size() > k) nodes.resize(k);

    std::vector<DestinationRanking> out;
    out.reserve(nodes.size());
    for (const NodeStat* node : nodes) {
        const EdgeStat* best = nullptr;
        for (const auto& [key, e] : g.edges) {
            if (e.dest_cui != node->cui) continue;
            if (!best || e.pair_count > best->pair_count ||
                (e.pair_count == best->pair_count && e.source_cui < best->source_cui))
                best = &e;
        }
        double ratio = static_cast<double>(best->pair_count) /
                       static_cast<double>(node->destination_frequency);
        out.push_back(DestinationRanking{*node, *best, ratio});
    }
    return out;
}

// For the top-k sources, whether the relationship reverses: report the
// best destination D and the weight of edge (D -> source) when present.
inline std::vector<ReversePairEntry> reverse_pair_report(const MisdxGraph& g, std::size_t k) {
    std::vector<ReversePairEntry> out;
    for (const SourceRanking& row : top_sources(g, k)) {
        ReversePairEntry entry{row.node.cui, row.best_out_edge.dest_cui, std::nullopt};
        auto it = g.edges.find({entry.best_dest_cui, entry.source_cui});
        if (it != g.edges.end()) entry.reverse_weight = it->second.weight;
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace misdx
