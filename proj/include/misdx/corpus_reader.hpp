#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "misdx/byte_source.hpp"
#include "misdx/errors.hpp"
#include "misdx/text.hpp"
#include "misdx/xml_scanner.hpp"

namespace misdx {

struct Citation {
    std::string pmid;   // non-empty, digits only
    std::string title;  // non-empty, whitespace-normalized
};

struct CorpusStats {
    std::uint64_t files_read = 0;
    std::uint64_t citations_scanned = 0;
    std::uint64_t records_skipped_malformed = 0;

    CorpusStats& operator+=(const CorpusStats& o) {
        files_read += o.files_read;
        citations_scanned += o.citations_scanned;
        records_skipped_malformed += o.records_skipped_malformed;
        return *this;
    }
};

// Streams (PMID, title) pairs out of one MEDLINE/PubMed baseline file
// without materializing the document. Recognized shape:
// PubmedArticle/MedlineCitation/PMID and .../Article/ArticleTitle; every
// other element is ignored. Records missing either field are counted and
// skipped. Embedded markup inside a title (italics and the like) is
// stripped, entities are decoded, and whitespace runs collapse to single
// spaces.
class CitationStream {
public:
    explicit CitationStream(std::unique_ptr<ByteSource> source)
        : source_(std::move(source)), scanner_(*source_) {
        stats_.files_read = 1;
    }

    explicit CitationStream(const std::string& path, Compression compression = Compression::autodetect)
        : CitationStream(open_byte_source(path, compression)) {}

    const CorpusStats& stats() const noexcept { return stats_; }

    // Next well-formed citation in document order, or nullopt at end of
    // stream. Throws XmlParseError when the stream itself is not XML.
    std::optional<Citation> next() {
        if (done_) return std::nullopt;
        while (true) {
            XmlEvent ev = scanner_.next();
            switch (ev.kind) {
                case XmlEvent::Kind::start_element:
                    if (auto c = on_start(ev)) return c;
                    break;
                case XmlEvent::Kind::end_element:
                    if (auto c = on_end(ev)) return c;
                    break;
                case XmlEvent::Kind::text:
                    on_text(ev);
                    break;
                case XmlEvent::Kind::eof:
                    if (!stack_.empty())
                        throw XmlParseError("unexpected end of input with <" + stack_.back() + "> unclosed",
                                            ev.offset);
                    done_ = true;
                    return std::nullopt;
            }
        }
    }

private:
    struct Record {
        std::size_t element_index = 0;  // stack index of the PubmedArticle element
        std::string pmid;
        std::string title;
        bool pmid_seen = false;
        bool title_seen = false;
        bool malformed = false;
    };

    bool in_record() const noexcept { return record_.has_value(); }

    std::optional<Citation> on_start(const XmlEvent& ev) {
        if (!in_record() && ev.name == "PubmedArticle") {
            if (ev.self_closing) {
                ++stats_.citations_scanned;
                ++stats_.records_skipped_malformed;
                return std::nullopt;
            }
            stack_.push_back(ev.name);
            record_ = Record{stack_.size() - 1, "", "", false, false, false};
            return std::nullopt;
        }

        if (in_record()) {
            const std::size_t base = record_->element_index;
            const std::size_t depth = stack_.size();  // depth before this element
            bool starts_pmid = !record_->pmid_seen && ev.name == "PMID" && depth == base + 2 &&
                               stack_[base + 1] == "MedlineCitation";
            bool starts_title = !record_->title_seen && ev.name == "ArticleTitle" && depth == base + 3 &&
                                stack_[base + 1] == "MedlineCitation" && stack_[base + 2] == "Article";
            if (starts_pmid) {
                record_->pmid_seen = true;
                if (!ev.self_closing) capturing_pmid_depth_ = depth + 1;
            }
            if (starts_title) {
                record_->title_seen = true;
                if (!ev.self_closing) capturing_title_depth_ = depth + 1;
            }
        }

        if (!ev.self_closing) stack_.push_back(ev.name);
        return std::nullopt;
    }

    void on_text(const XmlEvent& ev) {
        if (in_record()) {
            if (capturing_pmid_depth_ && stack_.size() >= *capturing_pmid_depth_)
                record_->pmid += ev.text;
            else if (capturing_title_depth_ && stack_.size() >= *capturing_title_depth_)
                record_->title += ev.text;
            return;
        }
        if (stack_.empty()) {
            for (char c : ev.text)
                if (!is_ascii_space(c))
                    throw XmlParseError("character data outside the document root", ev.offset);
        }
    }

    std::optional<Citation> on_end(const XmlEvent& ev) {
        // Find the matching open element, tolerating record-internal
        // mismatches (those mark the record malformed instead of killing
        // the stream).
        std::size_t i = stack_.size();
        while (i > 0 && stack_[i - 1] != ev.name) --i;
        if (i == 0) {
            if (in_record()) {
                record_->malformed = true;
                return std::nullopt;  // stray end tag inside a record
            }
            throw XmlParseError("end tag </" + ev.name + "> matches no open element", ev.offset);
        }
        if (i != stack_.size() && !in_record())
            throw XmlParseError("mismatched end tag </" + ev.name + ">", ev.offset);
        if (i != stack_.size() && in_record()) record_->malformed = true;

        bool closes_record = in_record() && i - 1 <= record_->element_index;
        stack_.resize(i - 1);

        if (capturing_pmid_depth_ && stack_.size() < *capturing_pmid_depth_)
            capturing_pmid_depth_.reset();
        if (capturing_title_depth_ && stack_.size() < *capturing_title_depth_)
            capturing_title_depth_.reset();

        if (closes_record) return finish_record();
        return std::nullopt;
    }

    std::optional<Citation> finish_record() {
        Record rec = std::move(*record_);
        record_.reset();
        capturing_pmid_depth_.reset();
        capturing_title_depth_.reset();
        ++stats_.citations_scanned;

        std::string pmid = collapse_whitespace(rec.pmid);
        std::string title = collapse_whitespace(rec.title);
        if (rec.malformed || !is_all_digits(pmid) || title.empty()) {
            ++stats_.records_skipped_malformed;
            return std::nullopt;
        }
        return Citation{std::move(pmid), std::move(title)};
    }

    std::unique_ptr<ByteSource> source_;
    XmlScanner scanner_;
    std::vector<std::string> stack_;
    std::optional<Record> record_;
    std::optional<std::size_t> capturing_pmid_depth_;
    std::optional<std::size_t> capturing_title_depth_;
    CorpusStats stats_;
    bool done_ = false;
};

}  // namespace misdx
