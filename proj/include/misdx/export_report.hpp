#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "misdx/corpus_reader.hpp"
#include "misdx/graph_builder.hpp"
#include "misdx/pair_extractor.hpp"

namespace misdx {

struct RunReport {
    CorpusStats corpus;
    std::uint64_t titles_with_cue = 0;
    std::uint64_t titles_selected = 0;  // always equals pairs_extracted
    std::uint64_t pairs_extracted = 0;
    std::uint64_t self_loops_dropped = 0;
    std::uint64_t node_count = 0;
    std::uint64_t edge_count = 0;
    std::map<std::string, std::uint64_t> rejection_breakdown;  // all four reasons, even when zero
    nlohmann::json config_echo = nlohmann::json::object();
};

inline std::map<std::string, std::uint64_t> empty_rejection_breakdown() {
    return {{to_string(RejectReason::zero_matches), 0},
            {to_string(RejectReason::one_match), 0},
            {to_string(RejectReason::too_many_matches), 0},
            {to_string(RejectReason::both_same_side), 0}};
}

// All writers are deterministic: the same graph produces byte-identical
// files no matter how it was assembled.

inline void write_edge_table(const MisdxGraph& g, std::ostream& os) {
    os << "source_cui\tsource_label\tdest_cui\tdest_label\tpair_count\tsource_frequency\tweight\n";
    // Row order: source asc, weight desc, dest asc. Within one source the
    // denominator is fixed, so weight desc is pair_count desc.
    std::vector<const EdgeStat*> edges;
    for (const auto& [key, e] : g.edges) edges.push_back(&e);
    std::sort(edges.begin(), edges.end(), [](const EdgeStat* a, const EdgeStat* b) {
        if (a->source_cui != b->source_cui) return a->source_cui < b->source_cui;
        if (a->pair_count != b->pair_count) return a->pair_count > b->pair_count;
        return a->dest_cui < b->dest_cui;
    });
    for (const EdgeStat* e : edges) {
        const NodeStat& src = g.nodes.at(e->source_cui);
        const NodeStat& dst = g.nodes.at(e->dest_cui);
        os << e->source_cui << '\t' << src.label << '\t' << e->dest_cui << '\t' << dst.label << '\t'
           << e->pair_count << '\t' << src.source_frequency << '\t'
           << format_ratio_4dp(e->pair_count, src.source_frequency) << '\n';
    }
}

inline void write_node_table(const MisdxGraph& g, std::ostream& os) {
    os << "cui\tlabel\tsource_frequency\tdestination_frequency\tout_degree\tin_degree\t"
          "out_degree_centrality\n";
    const std::uint64_t denom = g.node_count() > 1 ? g.node_count() - 1 : 0;
    for (const auto& [cui, n] : g.nodes) {
        os << n.cui << '\t' << n.label << '\t' << n.source_frequency << '\t' << n.destination_frequency
           << '\t' << n.out_degree << '\t' << n.in_degree << '\t'
           << format_ratio_4dp(n.out_degree, denom) << '\n';
    }
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace detail

// Graphviz DOT. Node size maps to out-degree centrality, edge darkness to
// the normalized weight; the actual rendering is left to external tools.
inline void write_dot(const MisdxGraph& g, std::ostream& os) {
    const std::uint64_t denom = g.node_count() > 1 ? g.node_count() - 1 : 0;
    os << "digraph misdiagnosis {\n";
    for (const auto& [cui, n] : g.nodes)
        os << "  \"" << detail::dot_escape(n.cui) << "\" [label=\"" << detail::dot_escape(n.label)
           << "\", out_degree_centrality=\"" << format_ratio_4dp(n.out_degree, denom) << "\"];\n";
    for (const auto& [key, e] : g.edges)
        os << "  \"" << detail::dot_escape(e.source_cui) << "\" -> \"" << detail::dot_escape(e.dest_cui)
           << "\" [weight=\"" << format_ratio_4dp(e.pair_count, g.nodes.at(e.source_cui).source_frequency)
           << "\", pair_count=\"" << e.pair_count << "\"];\n";
    os << "}\n";
}

inline void write_graphml(const MisdxGraph& g, std::ostream& os) {
    const std::uint64_t denom = g.node_count() > 1 ? g.node_count() - 1 : 0;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
          "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\"\n"
          "         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\"\n"
          "         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
          "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n"
          "  <key id=\"d0\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
          "  <key id=\"d1\" for=\"node\" attr.name=\"out_degree_centrality\" attr.type=\"double\"/>\n"
          "  <key id=\"d2\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
          "  <key id=\"d3\" for=\"edge\" attr.name=\"pair_count\" attr.type=\"long\"/>\n"
          "  <graph id=\"misdiagnosis\" edgedefault=\"directed\">\n";
    for (const auto& [cui, n] : g.nodes) {
        os << "    <node id=\"" << detail::xml_escape(n.cui) << "\">\n"
           << "      <data key=\"d0\">" << detail::xml_escape(n.label) << "</data>\n"
           << "      <data key=\"d1\">" << format_ratio_4dp(n.out_degree, denom) << "</data>\n"
           << "    </node>\n";
    }
    for (const auto& [key, e] : g.edges) {
        os << "    <edge source=\"" << detail::xml_escape(e.source_cui) << "\" target=\""
           << detail::xml_escape(e.dest_cui) << "\">\n"
           << "      <data key=\"d2\">"
           << format_ratio_4dp(e.pair_count, g.nodes.at(e.source_cui).source_frequency) << "</data>\n"
           << "      <data key=\"d3\">" << e.pair_count << "</data>\n"
           << "    </edge>\n";
    }
    os << "  </graph>\n</graphml>\n";
}

inline nlohmann::json report_to_json(const RunReport& r) {
    nlohmann::json j;
    j["citations_scanned"] = r.corpus.citations_scanned;
    j["files_read"] = r.corpus.files_read;
    j["records_skipped_malformed"] = r.corpus.records_skipped_malformed;
    j["titles_with_cue"] = r.titles_with_cue;
    j["titles_selected"] = r.titles_selected;
    j["pairs_extracted"] = r.pairs_extracted;
    j["self_loops_dropped"] = r.self_loops_dropped;
    j["node_count"] = r.node_count;
    j["edge_count"] = r.edge_count;
    j["rejection_breakdown"] = r.rejection_breakdown;
    j["config_echo"] = r.config_echo;
    return j;
}

inline void write_report(const RunReport& r, std::ostream& os) {
    os << report_to_json(r).dump(2) << '\n';
}

struct RejectRecord {
    std::string pmid;
    RejectReason reason;
};

inline void write_rejects(const std::vector<RejectRecord>& rejects, std::ostream& os) {
    os << "pmid\treason\n";
    for (const auto& r : rejects) os << r.pmid << '\t' << to_string(r.reason) << '\n';
}

// Checkpoint format shared by the extract and graph stages.
inline void write_pairs(const std::vector<RawPair>& pairs, std::ostream& os) {
    for (const auto& p : pairs) os << p.pmid << '\t' << p.source_cui << '\t' << p.dest_cui << '\t' << p.title << '\n';
}

inline std::vector<RawPair> read_pairs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open pairs file '" + path + "'");
    std::vector<RawPair> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        std::size_t t3 = t2 == std::string::npos ? t2 : line.find('\t', t2 + 1);
        if (t3 == std::string::npos) throw LoadError(path, lineno, "expected 4 tab-separated columns");
        RawPair p;
        p.pmid = line.substr(0, t1);
        p.source_cui = line.substr(t1 + 1, t2 - t1 - 1);
        p.dest_cui = line.substr(t2 + 1, t3 - t2 - 1);
        p.title = line.substr(t3 + 1);
        if (!is_all_digits(p.pmid)) throw LoadError(path, lineno, "malformed PMID '" + p.pmid + "'");
        if (!is_valid_cui(p.source_cui)) throw LoadError(path, lineno, "malformed CUI '" + p.source_cui + "'");
        if (!is_valid_cui(p.dest_cui)) throw LoadError(path, lineno, "malformed CUI '" + p.dest_cui + "'");
        pairs.push_back(std::move(p));
    }
    return pairs;
}

template <typename WriteFn>
inline void write_file(const std::string& path, WriteFn&& fn) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    fn(out);
    out.flush();
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace misdx
