#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "misdx/graph_builder.hpp"

using namespace misdx;

namespace {

CanonicalPair pair(const char* s, const char* d) {
    return CanonicalPair{s, d, "0", std::string_view(s) == d};
}

std::vector<CanonicalPair> pairs_fixture() {
    // {(A->B) x2, (A->C), (D->B)}
    return {pair("C0000001", "C0000002"), pair("C0000001", "C0000002"), pair("C0000001", "C0000003"),
            pair("C0000004", "C0000002")};
}

// Naive recomputation of every statistic with nested loops, used as the
// equivalence oracle on small fixtures.
struct NaiveStats {
    std::map<std::pair<std::string, std::string>, std::uint64_t> edge_counts;
    std::map<std::string, std::uint64_t> source_freq, dest_freq, out_deg, in_deg;
    std::uint64_t self_loops = 0;
};

NaiveStats naive(const std::vector<CanonicalPair>& pairs) {
    NaiveStats s;
    for (const auto& p : pairs) {
        if (p.source_cui == p.dest_cui) {
            ++s.self_loops;
            continue;
        }
        ++s.edge_counts[{p.source_cui, p.dest_cui}];
    }
    for (const auto& [key, count] : s.edge_counts) {
        s.source_freq[key.first] += count;
        s.dest_freq[key.second] += count;
        ++s.out_deg[key.first];
        ++s.in_deg[key.second];
    }
    return s;
}

}  // namespace

TEST_CASE("build_graph accumulates counts, weights, degrees", "[graph_builder]") {
    auto g = build_graph(pairs_fixture());
    REQUIRE(g.node_count() == 4);
    REQUIRE(g.edge_count() == 3);

    const auto& a = g.nodes.at("C0000001");
    CHECK(a.source_frequency == 3);
    CHECK(a.out_degree == 2);
    CHECK(a.in_degree == 0);
    CHECK_THAT(g.edges.at({"C0000001", "C0000002"}).weight, Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
    CHECK_THAT(g.edges.at({"C0000001", "C0000003"}).weight, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));

    const auto& b = g.nodes.at("C0000002");
    CHECK(b.destination_frequency == 3);
    CHECK(b.in_degree == 2);
    CHECK(b.out_degree == 0);

    // centrality = out_degree / (node_count - 1)
    CHECK_THAT(a.out_degree_centrality, Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
    CHECK_THAT(b.out_degree_centrality, Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("self loops are dropped before any frequency is computed", "[graph_builder]") {
    auto g = build_graph(std::vector<CanonicalPair>{pair("C0000001", "C0000001")});
    CHECK(g.node_count() == 0);
    CHECK(g.edge_count() == 0);
    CHECK(g.self_loops_dropped == 1);

    std::vector<CanonicalPair> mixed = {pair("C0000001", "C0000001"), pair("C0000001", "C0000002")};
    auto g2 = build_graph(mixed);
    CHECK(g2.self_loops_dropped == 1);
    CHECK(g2.nodes.at("C0000001").source_frequency == 1);  // the loop never entered the denominator
    CHECK(g2.edges.at({"C0000001", "C0000002"}).weight == 1.0);
}

TEST_CASE("empty retained stream is a valid empty graph", "[graph_builder]") {
    auto g = build_graph(std::vector<CanonicalPair>{});
    CHECK(g.node_count() == 0);
    CHECK(top_sources(g, 5).empty());
    CHECK(top_destinations(g, 5).empty());
}

TEST_CASE("labels resolve from the map with CUI fallback", "[graph_builder]") {
    auto g = build_graph(pairs_fixture(), {{"C0000001", "Tuberculosis"}});
    CHECK(g.nodes.at("C0000001").label == "Tuberculosis");
    CHECK(g.nodes.at("C0000002").label == "C0000002");
}

TEST_CASE("4dp rendering contract: 7 of 68 renders 0.1029", "[graph_builder]") {
    std::vector<CanonicalPair> pairs;
    for (int i = 0; i < 7; ++i) pairs.push_back(pair("C0000001", "C0000002"));
    for (int i = 0; i < 61; ++i) pairs.push_back(pair("C0000001", "C0000003"));
    auto g = build_graph(pairs);
    REQUIRE(g.nodes.at("C0000001").source_frequency == 68);
    CHECK(format_ratio_4dp(g.edges.at({"C0000001", "C0000002"}).pair_count, 68) == "0.1029");
}

TEST_CASE("top_sources ranks by source frequency with its best out-edge", "[graph_builder]") {
    auto g = build_graph(pairs_fixture());
    auto top = top_sources(g, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].node.cui == "C0000001");
    CHECK(top[0].node.source_frequency == 3);
    CHECK(top[0].best_out_edge.dest_cui == "C0000002");
    CHECK(top[0].best_out_edge.pair_count == 2);
    CHECK(top[1].node.cui == "C0000004");
    CHECK(top[1].node.source_frequency == 1);

    SECTION("fewer than k sources gives a shorter list") {
        CHECK(top_sources(g, 10).size() == 2);
    }
    SECTION("ties break by pair count then dest CUI") {
        std::vector<CanonicalPair> tied = {pair("C0000001", "C0000003"), pair("C0000001", "C0000002")};
        auto gt = build_graph(tied);
        auto rows = top_sources(gt, 1);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].best_out_edge.dest_cui == "C0000002");
    }
}

TEST_CASE("top_destinations mirrors with destination frequency", "[graph_builder]") {
    // {(A->B) x2, (C->B)}
    std::vector<CanonicalPair> pairs = {pair("C0000001", "C0000002"), pair("C0000001", "C0000002"),
                                        pair("C0000003", "C0000002")};
    auto g = build_graph(pairs);
    auto top = top_destinations(g, 1);
    REQUIRE(top.size() == 1);
    CHECK(top[0].node.cui == "C0000002");
    CHECK(top[0].node.destination_frequency == 3);
    CHECK(top[0].node.in_degree == 2);
    CHECK(top[0].best_in_edge.source_cui == "C0000001");
    CHECK_THAT(top[0].best_in_weight, Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
}

TEST_CASE("reverse_pair_report flags reciprocal edges", "[graph_builder]") {
    SECTION("reverse edge present") {
        std::vector<CanonicalPair> pairs = {pair("C0000001", "C0000002"), pair("C0000002", "C0000001")};
        auto report = reverse_pair_report(build_graph(pairs), 5);
        REQUIRE(report.size() == 2);
        REQUIRE(report[0].reverse_weight.has_value());
        CHECK(*report[0].reverse_weight == 1.0);
    }
    SECTION("reverse edge absent") {
        std::vector<CanonicalPair> pairs = {pair("C0000001", "C0000002")};
        auto report = reverse_pair_report(build_graph(pairs), 5);
        REQUIRE(report.size() == 1);
        CHECK(report[0].source_cui == "C0000001");
        CHECK(report[0].best_dest_cui == "C0000002");
        CHECK_FALSE(report[0].reverse_weight.has_value());
    }
}

TEST_CASE("property: out-edge weights of every source sum to one", "[graph_builder]") {
    std::mt19937 rng(550123);
    for (int iter = 0; iter < 150; ++iter) {
        std::vector<CanonicalPair> pairs;
        const int n = 1 + int(rng() % 60);
        for (int i = 0; i < n; ++i) {
            char s[16], d[16];
            std::snprintf(s, sizeof s, "C%07u", unsigned(rng() % 8));
            std::snprintf(d, sizeof d, "C%07u", unsigned(rng() % 8));
            pairs.push_back(CanonicalPair{s, d, "0", std::string(s) == d});
        }
        auto g = build_graph(pairs);
        std::map<std::string, double> sums;
        std::map<std::string, std::uint64_t> counts;
        for (const auto& [key, e] : g.edges) {
            sums[e.source_cui] += e.weight;
            counts[e.source_cui] += e.pair_count;
        }
        std::uint64_t total = 0;
        for (const auto& [cui, sum] : sums) {
            CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-9));
        }
        for (const auto& [cui, c] : counts) total += c;
        CHECK(total == pairs.size() - g.self_loops_dropped);
    }
}

TEST_CASE("property: graph build is order-independent and matches naive loops", "[graph_builder]") {
    std::mt19937 rng(87501);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<CanonicalPair> pairs;
        const int n = int(rng() % 50);
        for (int i = 0; i < n; ++i) {
            char s[16], d[16];
            std::snprintf(s, sizeof s, "C%07u", unsigned(rng() % 6));
            std::snprintf(d, sizeof d, "C%07u", unsigned(rng() % 6));
            pairs.push_back(CanonicalPair{s, d, "0", std::string(s) == d});
        }
        auto g = build_graph(pairs);

        auto expected = naive(pairs);
        CHECK(g.self_loops_dropped == expected.self_loops);
        REQUIRE(g.edge_count() == expected.edge_counts.size());
        for (const auto& [key, count] : expected.edge_counts) {
            CHECK(g.edges.at(key).pair_count == count);
        }
        REQUIRE(g.node_count() == expected.source_freq.size() + expected.dest_freq.size() -
                                      [&] {
                                          std::size_t both = 0;
                                          for (const auto& [cui, f] : expected.source_freq)
                                              both += expected.dest_freq.count(cui);
                                          return both;
                                      }());
        for (const auto& [cui, node] : g.nodes) {
            auto get = [](const std::map<std::string, std::uint64_t>& m, const std::string& k) {
                auto it = m.find(k);
                return it == m.end() ? std::uint64_t{0} : it->second;
            };
            CHECK(node.source_frequency == get(expected.source_freq, cui));
            CHECK(node.destination_frequency == get(expected.dest_freq, cui));
            CHECK(node.out_degree == get(expected.out_deg, cui));
            CHECK(node.in_degree == get(expected.in_deg, cui));
        }

        auto shuffled = pairs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto g2 = build_graph(shuffled);
        CHECK(g.edges == g2.edges);
        REQUIRE(g.node_count() == g2.node_count());
        for (const auto& [cui, node] : g.nodes) {
            const auto& other = g2.nodes.at(cui);
            CHECK(node.source_frequency == other.source_frequency);
            CHECK(node.out_degree == other.out_degree);
        }
    }
}
