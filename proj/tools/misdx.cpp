// misdx: mine misdiagnosis pairs from MEDLINE-format article titles and
// build the frequency-weighted directed graph. `run` is the single-shot
// path; filter/extract/graph expose the same stages for checkpointed runs.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "misdx/misdx.hpp"

namespace {

struct CommonMatcherFlags {
    double threshold = 0.7;
    std::size_t gram = 3;
    std::size_t window = 5;
    std::vector<std::string> phrases = misdx::kDefaultCuePhrases;
    std::vector<std::string> tuis{misdx::kDefaultAllowedTuis.begin(), misdx::kDefaultAllowedTuis.end()};
};

void add_matcher_flags(CLI::App* cmd, CommonMatcherFlags& flags) {
    cmd->add_option("--threshold", flags.threshold, "Similarity threshold in (0,1]")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--gram", flags.gram, "Character n-gram size");
    cmd->add_option("--window", flags.window, "Maximum candidate span, in tokens");
    cmd->add_option("--phrases", flags.phrases, "Cue phrases (comma separated)")->delimiter(',');
    cmd->add_option("--tuis", flags.tuis, "Allowed semantic types (comma separated)")->delimiter(',');
}

misdx::MatcherParams matcher_params(const CommonMatcherFlags& flags) {
    return misdx::MatcherParams{flags.gram, flags.window, flags.threshold};
}

std::string out_path(const std::string& dir, const char* name) {
    return (std::filesystem::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw misdx::IoError("cannot create output directory '" + dir + "': " + ec.message());
}

int cmd_run(const misdx::PipelineConfig& config) {
    misdx::RunReport report = misdx::run_pipeline(config);
    std::cerr << "citations scanned: " << report.corpus.citations_scanned << "\n"
              << "titles with cue:   " << report.titles_with_cue << "\n"
              << "pairs extracted:   " << report.pairs_extracted << "\n"
              << "graph:             " << report.node_count << " nodes, " << report.edge_count
              << " edges\n"
              << "outputs in:        " << config.output_dir << "\n";
    return 0;
}

int cmd_filter(const std::vector<std::string>& baseline, const std::vector<std::string>& phrases,
               const std::string& out_dir, std::size_t workers) {
    ensure_out_dir(out_dir);
    auto files = misdx::expand_baseline_paths(baseline);

    struct FileSlice {
        misdx::CorpusStats stats;
        std::vector<misdx::Citation> hits;
    };
    std::vector<FileSlice> slices(files.size());
    misdx::detail::parallel_for_index(files.size(), workers, [&](std::size_t i) {
        misdx::CitationStream stream(files[i]);
        while (auto citation = stream.next()) {
            if (misdx::find_cue(citation->title, phrases)) slices[i].hits.push_back(std::move(*citation));
        }
        slices[i].stats = stream.stats();
    });

    misdx::CorpusStats stats;
    std::size_t total = 0;
    misdx::write_file(out_path(out_dir, "titles.tsv"), [&](std::ostream& os) {
        for (const auto& slice : slices)
            for (const auto& c : slice.hits) {
                os << c.pmid << '\t' << c.title << '\n';
                ++total;
            }
    });
    for (const auto& slice : slices) stats += slice.stats;
    std::cerr << "citations scanned: " << stats.citations_scanned << "\n"
              << "titles with cue:   " << total << "\n"
              << "wrote:             " << out_path(out_dir, "titles.tsv") << "\n";
    return 0;
}

std::vector<misdx::Citation> read_titles(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw misdx::IoError("cannot open titles file '" + path + "'");
    std::vector<misdx::Citation> titles;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw misdx::LoadError(path, lineno, "expected 2 tab-separated columns");
        titles.push_back(misdx::Citation{line.substr(0, tab), line.substr(tab + 1)});
    }
    return titles;
}

int cmd_extract(const std::string& titles_path, const std::string& dictionary,
                const CommonMatcherFlags& flags, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    std::set<std::string> tuis(flags.tuis.begin(), flags.tuis.end());
    auto index = misdx::load_dictionary(dictionary, tuis, matcher_params(flags));

    std::vector<misdx::RawPair> pairs;
    std::vector<misdx::RejectRecord> rejects;
    for (const auto& citation : read_titles(titles_path)) {
        auto outcome = misdx::process_title(index, flags.phrases, citation);
        if (!outcome) continue;  // no cue phrase in this row
        if (outcome->pair)
            pairs.push_back(std::move(*outcome->pair));
        else
            rejects.push_back(misdx::RejectRecord{outcome->pmid, *outcome->reason});
    }
    misdx::write_file(out_path(out_dir, "pairs.tsv"), [&](std::ostream& os) { misdx::write_pairs(pairs, os); });
    misdx::write_file(out_path(out_dir, "rejects.tsv"),
                      [&](std::ostream& os) { misdx::write_rejects(rejects, os); });
    std::cerr << "pairs extracted: " << pairs.size() << "\nrejected titles: " << rejects.size() << "\n";
    return 0;
}

int cmd_graph(const std::string& pairs_path, const std::string& relations_path, bool fetch,
              const std::string& dictionary, const CommonMatcherFlags& flags,
              const misdx::CanonicalOptions& canonical, const misdx::RemoteFetchOptions& remote,
              const std::string& out_dir) {
    ensure_out_dir(out_dir);
    std::vector<misdx::RawPair> pairs = misdx::read_pairs(pairs_path);

    std::set<std::string> extracted;
    std::map<std::string, std::size_t> first_appearance;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (const std::string* cui : {&pairs[i].source_cui, &pairs[i].dest_cui}) {
            extracted.insert(*cui);
            first_appearance.try_emplace(*cui, i);
        }
    }

    std::vector<misdx::RelationRow> relations;
    if (!relations_path.empty()) {
        relations = misdx::load_relations(relations_path);
    } else if (fetch) {
        const char* key = std::getenv("UMLS_API_KEY");
        if (!key || !*key) throw misdx::ConfigError("remote fetch requires UMLS_API_KEY in the environment");
        auto fetched = misdx::fetch_relations_remote(extracted, key, remote);
        for (const auto& [cui, why] : fetched.failures)
            std::cerr << "warning: relations fetch failed for " << cui << ": " << why << "\n";
        relations = std::move(fetched.rows);
    }

    auto cmap = misdx::build_canonical_map(extracted, first_appearance, relations, canonical);
    std::vector<misdx::CanonicalPair> canonical_pairs;
    canonical_pairs.reserve(pairs.size());
    for (const auto& p : pairs) canonical_pairs.push_back(misdx::apply_map(cmap, p));

    std::map<std::string, std::string> labels;
    if (!dictionary.empty()) {
        std::set<std::string> tuis(flags.tuis.begin(), flags.tuis.end());
        labels = misdx::label_map(misdx::load_dictionary(dictionary, tuis, matcher_params(flags)));
    }

    auto graph = misdx::build_graph(canonical_pairs, labels);
    misdx::write_file(out_path(out_dir, "edges.tsv"), [&](std::ostream& os) { misdx::write_edge_table(graph, os); });
    misdx::write_file(out_path(out_dir, "nodes.tsv"), [&](std::ostream& os) { misdx::write_node_table(graph, os); });
    misdx::write_file(out_path(out_dir, "graph.dot"), [&](std::ostream& os) { misdx::write_dot(graph, os); });
    misdx::write_file(out_path(out_dir, "graph.graphml"),
                      [&](std::ostream& os) { misdx::write_graphml(graph, os); });
    std::cerr << "graph: " << graph.node_count() << " nodes, " << graph.edge_count() << " edges ("
              << graph.self_loops_dropped << " self-loops dropped)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mine disease-misdiagnosis pairs from MEDLINE-format titles"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read defaults from an INI/TOML config file");
    app.get_config_formatter_base()->comment('#');

    // run
    misdx::PipelineConfig config;
    CommonMatcherFlags run_flags;
    auto* run = app.add_subcommand("run", "Run the whole pipeline and write all outputs");
    run->add_option("--baseline", config.baseline_paths, "Baseline XML files or directories (.xml or .xml.gz)")
        ->required();
    run->add_option("--dictionary", config.dictionary_path, "Disease dictionary TSV")->required();
    auto* rel_opt = run->add_option("--relations", config.relations_path, "CUI relations TSV");
    run->add_flag("--fetch-relations", config.fetch_relations,
                  "Fetch relations from the terminology service (needs UMLS_API_KEY)")
        ->excludes(rel_opt);
    run->add_option("--out", config.output_dir, "Output directory")->required();
    run->add_option("--workers", config.workers, "Concurrent corpus readers")->check(CLI::PositiveNumber);
    run->add_flag("--canonical-single-step", "Collapse parents one hop instead of to a fixpoint");
    run->add_flag("--canonical-synonyms-first", config.canonical.synonyms_before_parents,
                  "Apply synonym components before parent collapse");
    run->add_option("--umls-base-url", config.remote.base_url, "Terminology service base URL");
    run->add_option("--relations-cache", config.remote.cache_path, "Relations cache file (remote fetch)");
    add_matcher_flags(run, run_flags);

    // filter
    std::vector<std::string> filter_baseline;
    std::vector<std::string> filter_phrases = misdx::kDefaultCuePhrases;
    std::string filter_out;
    std::size_t filter_workers = 1;
    auto* filter = app.add_subcommand("filter", "Select cue-bearing titles into titles.tsv");
    filter->add_option("--baseline", filter_baseline, "Baseline XML files or directories")->required();
    filter->add_option("--phrases", filter_phrases, "Cue phrases (comma separated)")->delimiter(',');
    filter->add_option("--out", filter_out, "Output directory")->required();
    filter->add_option("--workers", filter_workers, "Concurrent corpus readers")->check(CLI::PositiveNumber);

    // extract
    std::string extract_titles, extract_dictionary, extract_out;
    CommonMatcherFlags extract_flags;
    auto* extract = app.add_subcommand("extract", "Extract pairs.tsv and rejects.tsv from titles.tsv");
    extract->add_option("--titles", extract_titles, "titles.tsv from the filter stage")->required();
    extract->add_option("--dictionary", extract_dictionary, "Disease dictionary TSV")->required();
    extract->add_option("--out", extract_out, "Output directory")->required();
    add_matcher_flags(extract, extract_flags);

    // graph
    std::string graph_pairs, graph_relations, graph_dictionary, graph_out;
    bool graph_fetch = false;
    CommonMatcherFlags graph_flags;
    misdx::CanonicalOptions graph_canonical;
    misdx::RemoteFetchOptions graph_remote;
    auto* graph = app.add_subcommand("graph", "Build graph outputs from pairs.tsv");
    graph->add_option("--pairs", graph_pairs, "pairs.tsv from the extract stage")->required();
    auto* graph_rel_opt = graph->add_option("--relations", graph_relations, "CUI relations TSV");
    graph->add_flag("--fetch-relations", graph_fetch, "Fetch relations from the terminology service")
        ->excludes(graph_rel_opt);
    graph->add_option("--dictionary", graph_dictionary, "Dictionary TSV for node labels (optional)");
    graph->add_option("--out", graph_out, "Output directory")->required();
    graph->add_flag("--canonical-single-step", "Collapse parents one hop instead of to a fixpoint");
    graph->add_flag("--canonical-synonyms-first", graph_canonical.synonyms_before_parents,
                    "Apply synonym components before parent collapse");
    graph->add_option("--umls-base-url", graph_remote.base_url, "Terminology service base URL");
    graph->add_option("--relations-cache", graph_remote.cache_path, "Relations cache file (remote fetch)");
    add_matcher_flags(graph, graph_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            config.matcher = matcher_params(run_flags);
            config.phrases = run_flags.phrases;
            config.allowed_tuis = std::set<std::string>(run_flags.tuis.begin(), run_flags.tuis.end());
            config.canonical.transitive_parents = run->count("--canonical-single-step") == 0;
            return cmd_run(config);
        }
        if (filter->parsed()) return cmd_filter(filter_baseline, filter_phrases, filter_out, filter_workers);
        if (extract->parsed()) return cmd_extract(extract_titles, extract_dictionary, extract_flags, extract_out);
        if (graph->parsed()) {
            graph_canonical.transitive_parents = graph->count("--canonical-single-step") == 0;
            return cmd_graph(graph_pairs, graph_relations, graph_fetch, graph_dictionary, graph_flags,
                             graph_canonical, graph_remote, graph_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
