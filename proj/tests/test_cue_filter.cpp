#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "misdx/cue_filter.hpp"

using namespace misdx;

TEST_CASE("find_cue locates the earliest phrase with exact offsets", "[cue_filter]") {
    auto hit = find_cue("Tuberculosis misdiagnosed as carcinoma of the lung", kDefaultCuePhrases);
    REQUIRE(hit);
    CHECK(hit->phrase == "misdiagnosed as");
    CHECK(hit->start == 13);
    CHECK(hit->end == 28);
}

TEST_CASE("find_cue returns nothing when no phrase occurs", "[cue_filter]") {
    CHECK_FALSE(find_cue("Pulmonary nodules in a smoker", kDefaultCuePhrases));
}

TEST_CASE("matching is case-insensitive", "[cue_filter]") {
    auto hit = find_cue("Lymphoma Masquerading As cellulitis", kDefaultCuePhrases);
    REQUIRE(hit);
    CHECK(hit->phrase == "masquerading as");
    CHECK(hit->start == 9);
    CHECK(hit->end == 24);
}

TEST_CASE("ties at the same offset go to the phrase listed first", "[cue_filter]") {
    std::vector<std::string> phrases = {"misdiagnosed", "misdiagnosed as"};
    auto hit = find_cue("X misdiagnosed as Y", phrases);
    REQUIRE(hit);
    CHECK(hit->phrase == "misdiagnosed");

    std::vector<std::string> reversed = {"misdiagnosed as", "misdiagnosed"};
    hit = find_cue("X misdiagnosed as Y", reversed);
    REQUIRE(hit);
    CHECK(hit->phrase == "misdiagnosed as");
}

TEST_CASE("earliest occurrence wins across phrases", "[cue_filter]") {
    auto hit = find_cue("A masquerading as B misdiagnosed as C", kDefaultCuePhrases);
    REQUIRE(hit);
    CHECK(hit->phrase == "masquerading as");
    CHECK(hit->start == 2);
}

TEST_CASE("invalid phrase lists are rejected", "[cue_filter]") {
    CHECK_THROWS_AS(find_cue("anything", std::span<const std::string>{}), std::invalid_argument);
    std::vector<std::string> with_empty = {""};
    CHECK_THROWS_AS(find_cue("anything", with_empty), std::invalid_argument);
}

TEST_CASE("property: hit equals phrase under folding; suffixes never move it", "[cue_filter]") {
    std::mt19937 rng(20240817);
    const std::vector<std::string> words = {"Sarcoidosis", "lupus", "ANCA", "vasculitis", "in", "the", "young"};
    auto random_text = [&](std::size_t n) {
        std::string t;
        for (std::size_t i = 0; i < n; ++i) {
            if (i) t += ' ';
            t += words[rng() % words.size()];
        }
        return t;
    };

    for (int iter = 0; iter < 300; ++iter) {
        std::string title = random_text(rng() % 4);
        if (rng() % 2) {
            if (!title.empty()) title += ' ';
            title += kDefaultCuePhrases[rng() % kDefaultCuePhrases.size()];
            title += ' ' + random_text(1 + rng() % 3);
        }
        auto hit = find_cue(title, kDefaultCuePhrases);
        if (hit) {
            auto folded = to_lower(title);
            CHECK(folded.substr(hit->start, hit->end - hit->start) == to_lower(hit->phrase));
            // appending text never changes an existing hit
            auto extended = find_cue(title + " and more words", kDefaultCuePhrases);
            REQUIRE(extended);
            CHECK(extended->phrase == hit->phrase);
            CHECK(extended->start == hit->start);
        }
    }
}
