#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "misdx/text.hpp"

namespace misdx {

inline const std::vector<std::string> kDefaultCuePhrases = {"misdiagnosed as", "masquerading as"};

struct CueHit {
    std::string phrase;     // canonical phrase text as configured
    std::size_t start = 0;  // character offset, inclusive
    std::size_t end = 0;    // character offset, exclusive
};

// Earliest cue-phrase occurrence in the title, matched case-insensitively
// as a literal substring. Ties at the same offset go to the phrase listed
// first. Returns nothing when no phrase occurs.
inline std::optional<CueHit> find_cue(std::string_view title, std::span<const std::string> phrases) {
    if (phrases.empty()) throw std::invalid_argument("find_cue: phrase list is empty");
    const std::string folded = to_lower(title);
    std::optional<CueHit> best;
    for (const std::string& phrase : phrases) {
        if (phrase.empty()) throw std::invalid_argument("find_cue: empty phrase");
        std::size_t pos = folded.find(to_lower(phrase));
        if (pos == std::string::npos) continue;
        if (!best || pos < best->start) best = CueHit{phrase, pos, pos + phrase.size()};
    }
    return best;
}

}  // namespace misdx
