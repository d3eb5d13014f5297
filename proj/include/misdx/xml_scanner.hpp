#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "misdx/byte_source.hpp"
#include "misdx/errors.hpp"

namespace misdx {

struct XmlEvent {
    enum class Kind { start_element, end_element, text, eof };

    Kind kind = Kind::eof;
    std::string name;          // element name for start/end events
    std::string text;          // decoded character data for text events
    bool self_closing = false;
    std::uint64_t offset = 0;  // byte offset of the event in the (decompressed) stream
};

// Streaming pull scanner for the XML subset the MEDLINE baseline uses:
// prolog, doctype (with internal subset), comments, processing
// instructions, CDATA, elements with attributes, and character data with
// the predefined and numeric entities. Attributes are scanned past but not
// reported. Structural breakage throws XmlParseError with the byte offset;
// unknown named entities pass through verbatim, which is how the real
// corpus wants to be treated.
class XmlScanner {
public:
    explicit XmlScanner(ByteSource& source) : source_(&source), buf_(kBufSize) {}

    std::uint64_t offset() const noexcept { return base_ + pos_; }

    // Next event in document order. Kind::eof once the input is exhausted.
    XmlEvent next() {
        int c = peek();
        if (c < 0) return XmlEvent{XmlEvent::Kind::eof, "", "", false, offset()};
        if (c != '<') return scan_text();

        std::uint64_t start = offset();
        get();  // '<'
        c = peek();
        if (c < 0) throw XmlParseError("unexpected end of input after '<'", start);
        if (c == '!') return scan_bang(start);
        if (c == '?') {
            skip_pi(start);
            return next();
        }
        if (c == '/') return scan_end_tag(start);
        return scan_start_tag(start);
    }

private:
    static constexpr std::size_t kBufSize = 1 << 16;

    static bool is_name_start(int c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':' || c >= 0x80;
    }
    static bool is_name_char(int c) {
        return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
    }
    static bool is_space(int c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

    bool fill() {
        base_ += len_;
        pos_ = 0;
        len_ = source_->read(buf_.data(), buf_.size());
        return len_ > 0;
    }

    int peek() {
        if (pos_ >= len_ && !fill()) return -1;
        return static_cast<unsigned char>(buf_[pos_]);
    }

    int get() {
        int c = peek();
        if (c >= 0) ++pos_;
        return c;
    }

    void skip_space() {
        while (is_space(peek())) get();
    }

    std::string scan_name(const char* context) {
        std::uint64_t at = offset();
        int c = peek();
        if (!is_name_start(c)) throw XmlParseError(std::string("invalid ") + context + " name", at);
        std::string name;
        while (is_name_char(peek())) name.push_back(static_cast<char>(get()));
        return name;
    }

    XmlEvent scan_text() {
        XmlEvent ev;
        ev.kind = XmlEvent::Kind::text;
        ev.offset = offset();
        while (true) {
            int c = peek();
            if (c < 0 || c == '<') break;
            get();
            if (c == '&')
                append_entity(ev.text);
            else
                ev.text.push_back(static_cast<char>(c));
        }
        return ev;
    }

    // Called after consuming '&'. Appends the decoded entity, or the raw
    // bytes when the reference is unknown or unterminated.
    void append_entity(std::string& out) {
        std::string ref;
        while (ref.size() < 32) {
            int c = peek();
            if (c < 0 || c == '<') break;
            get();
            if (c == ';') {
                if (ref == "amp") out.push_back('&');
                else if (ref == "lt") out.push_back('<');
                else if (ref == "gt") out.push_back('>');
                else if (ref == "quot") out.push_back('"');
                else if (ref == "apos") out.push_back('\'');
                else if (!ref.empty() && ref[0] == '#') {
                    if (!append_codepoint(ref, out)) out += "&" + ref + ";";
                } else {
                    out += "&" + ref + ";";
                }
                return;
            }
            ref.push_back(static_cast<char>(c));
        }
        out += "&" + ref;  // unterminated; keep bytes as-is
    }

    static bool append_codepoint(const std::string& ref, std::string& out) {
        std::uint32_t cp = 0;
        std::size_t i = 1;
        bool hex = i < ref.size() && (ref[i] == 'x' || ref[i] == 'X');
        if (hex) ++i;
        if (i >= ref.size()) return false;
        for (; i < ref.size(); ++i) {
            char c = ref[i];
            std::uint32_t d;
            if (c >= '0' && c <= '9') d = static_cast<std::uint32_t>(c - '0');
            else if (hex && c >= 'a' && c <= 'f') d = static_cast<std::uint32_t>(c - 'a' + 10);
            else if (hex && c >= 'A' && c <= 'F') d = static_cast<std::uint32_t>(c - 'A' + 10);
            else return false;
            cp = cp * (hex ? 16 : 10) + d;
            if (cp > 0x10FFFF) return false;
        }
        if (cp == 0) return false;
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
        return true;
    }

    XmlEvent scan_bang(std::uint64_t start) {
        get();  // '!'
        if (peek() == '-') {
            get();
            if (get() != '-') throw XmlParseError("malformed comment", start);
            skip_comment(start);
            return next();
        }
        if (peek() == '[') return scan_cdata(start);
        skip_doctype(start);
        return next();
    }

    void skip_comment(std::uint64_t start) {
        int dashes = 0;
        while (true) {
            int c = get();
            if (c < 0) throw XmlParseError("unterminated comment", start);
            if (c == '-') {
                ++dashes;
            } else if (c == '>' && dashes >= 2) {
                return;
            } else {
                dashes = 0;
            }
        }
    }

    XmlEvent scan_cdata(std::uint64_t start) {
        static constexpr char kOpen[] = "[CDATA[";
        for (const char* p = kOpen; *p; ++p)
            if (get() != *p) throw XmlParseError("malformed CDATA section", start);
        XmlEvent ev;
        ev.kind = XmlEvent::Kind::text;
        ev.offset = start;
        int brackets = 0;
        while (true) {
            int c = get();
            if (c < 0) throw XmlParseError("unterminated CDATA section", start);
            if (c == ']') {
                ++brackets;
            } else if (c == '>' && brackets >= 2) {
                ev.text.resize(ev.text.size() - 2);  // drop the "]]"
                return ev;
            } else {
                brackets = 0;
            }
            ev.text.push_back(static_cast<char>(c));
        }
    }

    // <!DOCTYPE ...> possibly with an [ internal subset ].
    void skip_doctype(std::uint64_t start) {
        int depth = 0;
        while (true) {
            int c = get();
            if (c < 0) throw XmlParseError("unterminated markup declaration", start);
            if (c == '"' || c == '\'') {
                int quote = c;
                while (true) {
                    c = get();
                    if (c < 0) throw XmlParseError("unterminated literal in markup declaration", start);
                    if (c == quote) break;
                }
            } else if (c == '[') {
                ++depth;
            } else if (c == ']') {
                --depth;
            } else if (c == '<') {
                ++depth;  // nested declaration inside the internal subset
            } else if (c == '>') {
                if (depth <= 0) return;
                --depth;
            }
        }
    }

    void skip_pi(std::uint64_t start) {
        get();  // '?'
        bool question = false;
        while (true) {
            int c = get();
            if (c < 0) throw XmlParseError("unterminated processing instruction", start);
            if (c == '?') question = true;
            else if (c == '>' && question) return;
            else question = false;
        }
    }

    XmlEvent scan_end_tag(std::uint64_t start) {
        get();  // '/'
        XmlEvent ev;
        ev.kind = XmlEvent::Kind::end_element;
        ev.offset = start;
        ev.name = scan_name("end tag");
        skip_space();
        if (get() != '>') throw XmlParseError("expected '>' in end tag </" + ev.name, start);
        return ev;
    }

    XmlEvent scan_start_tag(std::uint64_t start) {
        XmlEvent ev;
        ev.kind = XmlEvent::Kind::start_element;
        ev.offset = start;
        ev.name = scan_name("element");
        while (true) {
            skip_space();
            int c = peek();
            if (c < 0) throw XmlParseError("unterminated start tag <" + ev.name, start);
            if (c == '>') {
                get();
                return ev;
            }
            if (c == '/') {
                get();
                if (get() != '>') throw XmlParseError("malformed empty-element tag <" + ev.name, start);
                ev.self_closing = true;
                return ev;
            }
            scan_name("attribute");
            skip_space();
            if (peek() == '=') {
                get();
                skip_space();
                int quote = get();
                if (quote != '"' && quote != '\'')
                    throw XmlParseError("attribute value must be quoted in <" + ev.name, start);
                while (true) {
                    c = get();
                    if (c < 0) throw XmlParseError("unterminated attribute value in <" + ev.name, start);
                    if (c == quote) break;
                }
            }
        }
    }

    ByteSource* source_;
    std::vector<char> buf_;
    std::size_t pos_ = 0;
    std::size_t len_ = 0;
    std::uint64_t base_ = 0;
};

}  // namespace misdx
