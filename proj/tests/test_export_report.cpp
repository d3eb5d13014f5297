#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "misdx/export_report.hpp"
#include "misdx/xml_scanner.hpp"
#include "test_util.hpp"

using namespace misdx;

namespace {

MisdxGraph two_edge_graph() {
    std::vector<CanonicalPair> pairs = {{"C0000001", "C0000002", "1", false},
                                        {"C0000001", "C0000002", "2", false},
                                        {"C0000001", "C0000003", "3", false}};
    return build_graph(pairs, {{"C0000001", "Alpha"}, {"C0000002", "Beta"}, {"C0000003", "Gamma"}});
}

std::string render(const MisdxGraph& g, void (*writer)(const MisdxGraph&, std::ostream&)) {
    std::ostringstream os;
    writer(g, os);
    return os.str();
}

}  // namespace

TEST_CASE("edge table renders sorted rows with 4dp weights", "[export_report]") {
    auto text = render(two_edge_graph(), write_edge_table);
    std::istringstream lines(text);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(lines, line)) rows.push_back(line);
    REQUIRE(rows.size() == 3);  // header + 2 edges
    CHECK(rows[0] == "source_cui\tsource_label\tdest_cui\tdest_label\tpair_count\tsource_frequency\tweight");
    CHECK(rows[1] == "C0000001\tAlpha\tC0000002\tBeta\t2\t3\t0.6667");
    CHECK(rows[2] == "C0000001\tAlpha\tC0000003\tGamma\t1\t3\t0.3333");
}

TEST_CASE("empty graph renders header only", "[export_report]") {
    MisdxGraph empty;
    CHECK(render(empty, write_edge_table) ==
          "source_cui\tsource_label\tdest_cui\tdest_label\tpair_count\tsource_frequency\tweight\n");
    std::istringstream node_lines(render(empty, write_node_table));
    std::string first;
    std::getline(node_lines, first);
    CHECK(first.starts_with("cui\tlabel"));
}

TEST_CASE("writers are deterministic", "[export_report]") {
    auto g = two_edge_graph();
    CHECK(render(g, write_edge_table) == render(g, write_edge_table));
    CHECK(render(g, write_dot) == render(g, write_dot));
    CHECK(render(g, write_graphml) == render(g, write_graphml));
}

TEST_CASE("DOT output quotes nodes and carries the attributes", "[export_report]") {
    std::vector<CanonicalPair> pairs = {{"C0000001", "C0000002", "1", false}};
    auto g = build_graph(pairs, {{"C0000001", "He said \"hi\""}});
    auto dot = render(g, write_dot);
    CHECK(dot.find("\"C0000001\" -> \"C0000002\"") != std::string::npos);
    CHECK(dot.find("weight=\"1.0000\"") != std::string::npos);
    CHECK(dot.find("pair_count=\"1\"") != std::string::npos);
    CHECK(dot.find("\\\"hi\\\"") != std::string::npos);  // label escaping
    // sinks still appear, with zero centrality
    CHECK(dot.find("\"C0000002\" [label=\"C0000002\", out_degree_centrality=\"0.0000\"]") !=
          std::string::npos);
}

TEST_CASE("GraphML is well-formed and declares its keys", "[export_report]") {
    auto g = two_edge_graph();
    auto xml = render(g, write_graphml);

    // parses cleanly with the project scanner
    MemoryByteSource source(xml, "graphml");
    XmlScanner scanner(source);
    int nodes = 0, edges = 0, depth = 0;
    while (true) {
        auto ev = scanner.next();
        if (ev.kind == XmlEvent::Kind::eof) break;
        if (ev.kind == XmlEvent::Kind::start_element) {
            if (!ev.self_closing) ++depth;
            nodes += ev.name == "node";
            edges += ev.name == "edge";
        }
        if (ev.kind == XmlEvent::Kind::end_element) --depth;
    }
    CHECK(depth == 0);
    CHECK(nodes == 3);
    CHECK(edges == 2);
    CHECK(xml.find("attr.name=\"out_degree_centrality\"") != std::string::npos);
    CHECK(xml.find("attr.name=\"weight\"") != std::string::npos);
    CHECK(xml.find("attr.name=\"pair_count\"") != std::string::npos);
    CHECK(xml.find("edgedefault=\"directed\"") != std::string::npos);
}

TEST_CASE("GraphML loads in networkx when python is available", "[export_report]") {
    testutil::TempDir dir("graphml");
    auto path = dir / "g.graphml";
    testutil::write_file(path, render(two_edge_graph(), write_graphml));
    std::string cmd =
        "python3 -c \"import networkx as nx; g = nx.read_graphml('" + path.string() +
        "'); assert g.number_of_nodes() == 3 and g.number_of_edges() == 2, (g.number_of_nodes(), "
        "g.number_of_edges()); assert abs(float(g.nodes['C0000001']['out_degree_centrality']) - 1.0) < 1e-9\" "
        "2>/dev/null";
    int probe = std::system("python3 -c 'import networkx' 2>/dev/null");
    if (probe != 0) SKIP("python3/networkx unavailable");
    CHECK(std::system(cmd.c_str()) == 0);
}

TEST_CASE("report JSON has stable keys and all counters", "[export_report]") {
    RunReport report;
    report.rejection_breakdown = empty_rejection_breakdown();
    std::ostringstream os;
    write_report(report, os);
    auto j = nlohmann::json::parse(os.str());
    CHECK(j["citations_scanned"] == 0);
    CHECK(j["files_read"] == 0);
    CHECK(j["pairs_extracted"] == 0);
    CHECK(j["rejection_breakdown"].size() == 4);
    CHECK(j["rejection_breakdown"]["zero_matches"] == 0);
    CHECK(j["config_echo"].is_object());

    report.titles_with_cue = 16;
    report.titles_selected = 10;
    report.pairs_extracted = 10;
    report.rejection_breakdown["one_match"] = 6;
    std::ostringstream os2;
    write_report(report, os2);
    auto j2 = nlohmann::json::parse(os2.str());
    std::uint64_t rejected = 0;
    for (const auto& [reason, count] : j2["rejection_breakdown"].items())
        rejected += count.get<std::uint64_t>();
    CHECK(j2["titles_with_cue"] == j2["titles_selected"].get<std::uint64_t>() + rejected);
}

TEST_CASE("pairs checkpoint round-trips", "[export_report]") {
    std::vector<RawPair> pairs = {{"C0041296", "C0007097", "1001", "T misdiagnosed as C"},
                                  {"C0001261", "C0006826", "1003", "A masquerading as M"}};
    testutil::TempDir dir("pairs");
    auto path = dir / "pairs.tsv";
    {
        std::ofstream out(path);
        write_pairs(pairs, out);
    }
    auto back = read_pairs(path.string());
    REQUIRE(back.size() == 2);
    CHECK(back[0].pmid == "1001");
    CHECK(back[0].source_cui == "C0041296");
    CHECK(back[0].dest_cui == "C0007097");
    CHECK(back[0].title == "T misdiagnosed as C");

    testutil::write_file(dir / "bad.tsv", "1001\tC0041296\tC0007097\n");
    CHECK_THROWS_AS(read_pairs((dir / "bad.tsv").string()), LoadError);
    testutil::write_file(dir / "bad2.tsv", "1001\tnope\tC0007097\tt\n");
    CHECK_THROWS_AS(read_pairs((dir / "bad2.tsv").string()), LoadError);
}

TEST_CASE("weight 1/3 renders 0.3333 in files", "[export_report]") {
    std::vector<CanonicalPair> pairs = {{"C0000001", "C0000002", "1", false},
                                        {"C0000001", "C0000003", "2", false},
                                        {"C0000001", "C0000004", "3", false}};
    auto g = build_graph(pairs);
    auto text = render(g, write_edge_table);
    CHECK(text.find("0.3333") != std::string::npos);
}
