#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "misdx/canonicalizer.hpp"
#include "misdx/concept_matcher.hpp"
#include "misdx/corpus_reader.hpp"
#include "misdx/cue_filter.hpp"
#include "misdx/errors.hpp"
#include "misdx/export_report.hpp"
#include "misdx/graph_builder.hpp"
#include "misdx/pair_extractor.hpp"
#include "misdx/umls_client.hpp"

namespace misdx {

struct PipelineConfig {
    std::vector<std::string> baseline_paths;  // files or directories
    std::string dictionary_path;
    std::string relations_path;  // empty and !fetch_relations -> identity canonicalization
    bool fetch_relations = false;
    std::vector<std::string> phrases = kDefaultCuePhrases;
    MatcherParams matcher;
    std::set<std::string> allowed_tuis = kDefaultAllowedTuis;
    CanonicalOptions canonical;
    std::string output_dir;
    std::size_t workers = 1;
    Compression compression = Compression::autodetect;
    RemoteFetchOptions remote;
};

// One cue-bearing title and what became of it, in corpus stream order.
struct TitleOutcome {
    std::string pmid;
    std::string title;
    std::optional<RawPair> pair;
    std::optional<RejectReason> reason;
};

struct ScanResult {
    CorpusStats stats;
    std::vector<TitleOutcome> outcomes;
};

namespace detail {

// Index-sharded work pool. Results land by index, so callers merge in
// input order no matter which worker got there first; the first failure
// (by index) is rethrown after all threads join.
template <typename Fn>
void parallel_for_index(std::size_t n, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::map<std::size_t, std::exception_ptr> errors;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    errors.emplace(i, std::current_exception());
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (!errors.empty()) std::rethrow_exception(errors.begin()->second);
}

}  // namespace detail

// Expands files and directories into the canonical input order: paths as
// given, directories replaced by their regular files sorted by name.
inline std::vector<std::string> expand_baseline_paths(const std::vector<std::string>& paths) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    for (const auto& p : paths) {
        fs::path path(p);
        std::error_code ec;
        if (fs::is_directory(path, ec)) {
            std::vector<std::string> inside;
            for (const auto& entry : fs::directory_iterator(path)) {
                if (entry.is_regular_file()) inside.push_back(entry.path().string());
            }
            std::sort(inside.begin(), inside.end());
            files.insert(files.end(), inside.begin(), inside.end());
        } else if (fs::is_regular_file(path, ec)) {
            files.push_back(p);
        } else {
            throw ConfigError("baseline path not found: " + p);
        }
    }
    if (files.empty()) throw ConfigError("no baseline input files");
    return files;
}

// Runs cue detection, matching, disambiguation, and pair selection on one
// citation. Returns nothing when the title has no cue phrase.
inline std::optional<TitleOutcome> process_title(const DictionaryIndex& index,
                                                 std::span<const std::string> phrases,
                                                 const Citation& citation) {
    auto cue = find_cue(citation.title, phrases);
    if (!cue) return std::nullopt;

    auto matches = drop_cue_overlaps(match_title(index, citation.title), cue->start, cue->end);
    auto groups = group_and_disambiguate(std::move(matches));
    auto outcome = extract_pair(citation, *cue, groups);

    TitleOutcome result;
    result.pmid = citation.pmid;
    result.title = citation.title;
    result.pair = std::move(outcome.pair);
    result.reason = outcome.reason;
    return result;
}

// Streams every file (in parallel across files), collecting cue-title
// outcomes in corpus stream order plus merged corpus statistics.
inline ScanResult scan_corpus(const std::vector<std::string>& files, const DictionaryIndex& index,
                              std::span<const std::string> phrases, std::size_t workers,
                              Compression compression = Compression::autodetect) {
    std::vector<ScanResult> per_file(files.size());
    detail::parallel_for_index(files.size(), workers, [&](std::size_t i) {
        CitationStream stream(files[i], compression);
        auto& slot = per_file[i];
        while (auto citation = stream.next()) {
            if (auto outcome = process_title(index, phrases, *citation))
                slot.outcomes.push_back(std::move(*outcome));
        }
        slot.stats = stream.stats();
    });

    ScanResult merged;
    for (auto& part : per_file) {
        merged.stats += part.stats;
        merged.outcomes.insert(merged.outcomes.end(), std::make_move_iterator(part.outcomes.begin()),
                               std::make_move_iterator(part.outcomes.end()));
    }
    return merged;
}

// Display names per CUI: the preferred term of the first dictionary entry
// in index order, which is stable regardless of file or worker order.
inline std::map<std::string, std::string> label_map(const DictionaryIndex& index) {
    std::map<std::string, std::string> labels;
    for (const auto& e : index.entries()) labels.try_emplace(e.cui, e.preferred_term);
    return labels;
}

inline nlohmann::json config_echo(const PipelineConfig& config) {
    nlohmann::json j;
    j["baseline"] = config.baseline_paths;
    j["dictionary"] = config.dictionary_path;
    j["relations"] = config.relations_path;
    j["fetch_relations"] = config.fetch_relations;
    j["phrases"] = config.phrases;
    j["similarity_threshold"] = config.matcher.threshold;
    j["gram_size"] = config.matcher.gram_size;
    j["max_window_tokens"] = config.matcher.max_window_tokens;
    j["allowed_tuis"] = config.allowed_tuis;
    j["canonical_single_step"] = !config.canonical.transitive_parents;
    j["canonical_synonyms_first"] = config.canonical.synonyms_before_parents;
    j["output_dir"] = config.output_dir;
    j["workers"] = config.workers;
    return j;
}

struct PipelineResult {
    RunReport report;
    MisdxGraph graph;
    std::vector<RawPair> pairs;
    std::vector<RejectRecord> rejects;
};

// The full run, outputs not yet written. Buffers raw pairs so the corpus is
// read exactly once; selected titles number in the thousands, not millions.
inline PipelineResult execute_pipeline(const PipelineConfig& config) {
    if (config.dictionary_path.empty()) throw ConfigError("dictionary path is required");
    if (config.workers < 1) throw ConfigError("worker count must be at least 1");
    if (config.fetch_relations && !config.relations_path.empty())
        throw ConfigError("choose either a relations file or remote fetch, not both");

    const char* api_key = nullptr;
    if (config.fetch_relations) {
        api_key = std::getenv("UMLS_API_KEY");
        if (!api_key || !*api_key) throw ConfigError("remote fetch requires UMLS_API_KEY in the environment");
    }

    DictionaryIndex index = load_dictionary(config.dictionary_path, config.allowed_tuis, config.matcher);
    std::vector<std::string> files = expand_baseline_paths(config.baseline_paths);
    ScanResult scan = scan_corpus(files, index, config.phrases, config.workers, config.compression);

    PipelineResult result;
    result.report.corpus = scan.stats;
    result.report.rejection_breakdown = empty_rejection_breakdown();
    result.report.config_echo = config_echo(config);

    std::set<std::string> extracted;
    std::map<std::string, std::size_t> first_appearance;
    for (const TitleOutcome& outcome : scan.outcomes) {
        ++result.report.titles_with_cue;
        if (outcome.pair) {
            const std::size_t ordinal = result.pairs.size();  // selected-title index, stream order
            for (const std::string* cui : {&outcome.pair->source_cui, &outcome.pair->dest_cui}) {
                extracted.insert(*cui);
                first_appearance.try_emplace(*cui, ordinal);
            }
            result.pairs.push_back(*outcome.pair);
        } else {
            ++result.report.rejection_breakdown[to_string(*outcome.reason)];
            result.rejects.push_back(RejectRecord{outcome.pmid, *outcome.reason});
        }
    }
    result.report.pairs_extracted = result.pairs.size();
    result.report.titles_selected = result.pairs.size();

    std::vector<RelationRow> relations;
    if (!config.relations_path.empty()) {
        relations = load_relations(config.relations_path);
    } else if (config.fetch_relations) {
        relations = fetch_relations_remote(extracted, api_key, config.remote).rows;
    }

    CanonicalMap cmap = build_canonical_map(extracted, first_appearance, relations, config.canonical);
    std::vector<CanonicalPair> canonical_pairs;
    canonical_pairs.reserve(result.pairs.size());
    for (const RawPair& p : result.pairs) canonical_pairs.push_back(apply_map(cmap, p));

    result.graph = build_graph(canonical_pairs, label_map(index));
    result.report.self_loops_dropped = result.graph.self_loops_dropped;
    result.report.node_count = result.graph.node_count();
    result.report.edge_count = result.graph.edge_count();
    return result;
}

inline void write_outputs(const PipelineResult& result, const std::string& output_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + output_dir + "': " + ec.message());

    auto in_dir = [&](const char* name) { return (fs::path(output_dir) / name).string(); };
    write_file(in_dir("edges.tsv"), [&](std::ostream& os) { write_edge_table(result.graph, os); });
    write_file(in_dir("nodes.tsv"), [&](std::ostream& os) { write_node_table(result.graph, os); });
    write_file(in_dir("graph.dot"), [&](std::ostream& os) { write_dot(result.graph, os); });
    write_file(in_dir("graph.graphml"), [&](std::ostream& os) { write_graphml(result.graph, os); });
    write_file(in_dir("report.json"), [&](std::ostream& os) { write_report(result.report, os); });
    write_file(in_dir("rejects.tsv"), [&](std::ostream& os) { write_rejects(result.rejects, os); });
    write_file(in_dir("pairs.tsv"), [&](std::ostream& os) { write_pairs(result.pairs, os); });
}

// Single-shot entry point: run everything and write all outputs.
inline RunReport run_pipeline(const PipelineConfig& config) {
    if (config.output_dir.empty()) throw ConfigError("output directory is required");
    PipelineResult result = execute_pipeline(config);
    write_outputs(result, config.output_dir);
    return result.report;
}

}  // namespace misdx
