#pragma once

#include <optional>
#include <span>
#include <string>

#include "misdx/concept_matcher.hpp"
#include "misdx/corpus_reader.hpp"
#include "misdx/cue_filter.hpp"
#include "misdx/errors.hpp"

namespace misdx {

// Directed misdiagnosis pair: the correct diagnosis precedes the cue
// phrase, the wrong one follows it.
struct RawPair {
    std::string source_cui;  // correct diagnosis
    std::string dest_cui;    // misdiagnosed as
    std::string pmid;
    std::string title;
};

enum class RejectReason { zero_matches, one_match, too_many_matches, both_same_side };

inline const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::zero_matches: return "zero_matches";
        case RejectReason::one_match: return "one_match";
        case RejectReason::too_many_matches: return "too_many_matches";
        case RejectReason::both_same_side: return "both_same_side";
    }
    return "unknown";
}

struct ExtractOutcome {
    std::optional<RawPair> pair;
    std::optional<RejectReason> reason;  // set iff pair is not
};

// Selection rule: exactly two disambiguated groups, one ending at or before
// the cue start and one beginning at or after the cue end. A span touching
// the cue boundary counts as the correct side; ends are exclusive, so
// adjacency is not overlap.
inline ExtractOutcome extract_pair(const Citation& citation, const CueHit& cue,
                                   std::span<const MatchGroup> groups) {
    if (groups.empty()) return {std::nullopt, RejectReason::zero_matches};
    if (groups.size() == 1) return {std::nullopt, RejectReason::one_match};
    if (groups.size() > 2) return {std::nullopt, RejectReason::too_many_matches};

    const MatchGroup& first = groups[0];
    const MatchGroup& second = groups[1];
    if (first.span_end <= cue.start && second.span_start >= cue.end)
        return {RawPair{first.winner.cui, second.winner.cui, citation.pmid, citation.title}, std::nullopt};
    return {std::nullopt, RejectReason::both_same_side};
}

}  // namespace misdx
