#pragma once

#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <zlib.h>

#include "misdx/errors.hpp"

namespace misdx {

// Pull-based byte stream. Sources are single-pass; rewind by reopening.
class ByteSource {
public:
    virtual ~ByteSource() = default;

    // Fills `out` with up to `cap` bytes. Returns 0 only at end of stream.
    virtual std::size_t read(char* out, std::size_t cap) = 0;

    virtual const std::string& name() const noexcept = 0;
};

class FileByteSource final : public ByteSource {
public:
    explicit FileByteSource(std::string path) : path_(std::move(path)), file_(std::fopen(path_.c_str(), "rb")) {
        if (!file_) throw IoError("cannot open '" + path_ + "': " + std::strerror(errno));
    }

    ~FileByteSource() override {
        if (file_) std::fclose(file_);
    }

    FileByteSource(const FileByteSource&) = delete;
    FileByteSource& operator=(const FileByteSource&) = delete;

    std::size_t read(char* out, std::size_t cap) override {
        std::size_t n = std::fread(out, 1, cap, file_);
        if (n == 0 && std::ferror(file_)) throw IoError("read error on '" + path_ + "'");
        return n;
    }

    const std::string& name() const noexcept override { return path_; }

private:
    std::string path_;
    std::FILE* file_ = nullptr;
};

class MemoryByteSource final : public ByteSource {
public:
    explicit MemoryByteSource(std::string data, std::string name = "<memory>")
        : data_(std::move(data)), name_(std::move(name)) {}

    std::size_t read(char* out, std::size_t cap) override {
        std::size_t n = std::min(cap, data_.size() - pos_);
        std::memcpy(out, data_.data() + pos_, n);
        pos_ += n;
        return n;
    }

    const std::string& name() const noexcept override { return name_; }

private:
    std::string data_;
    std::string name_;
    std::size_t pos_ = 0;
};

// Replays buffered prefix bytes before delegating to the wrapped source.
// Used for magic-byte sniffing.
class PrefixedByteSource final : public ByteSource {
public:
    PrefixedByteSource(std::string prefix, std::unique_ptr<ByteSource> inner)
        : prefix_(std::move(prefix)), inner_(std::move(inner)) {}

    std::size_t read(char* out, std::size_t cap) override {
        if (pos_ < prefix_.size()) {
            std::size_t n = std::min(cap, prefix_.size() - pos_);
            std::memcpy(out, prefix_.data() + pos_, n);
            pos_ += n;
            return n;
        }
        return inner_->read(out, cap);
    }

    const std::string& name() const noexcept override { return inner_->name(); }

private:
    std::string prefix_;
    std::unique_ptr<ByteSource> inner_;
    std::size_t pos_ = 0;
};

// Inflates a gzip stream on the fly. Handles multi-member files, which the
// annual baseline occasionally ships.
class GzipByteSource final : public ByteSource {
public:
    explicit GzipByteSource(std::unique_ptr<ByteSource> inner)
        : inner_(std::move(inner)), in_buf_(kChunk) {
        std::memset(&strm_, 0, sizeof(strm_));
        if (inflateInit2(&strm_, 15 + 16) != Z_OK)  // 15+16: gzip wrapper only
            throw IoError("inflateInit failed for '" + inner_->name() + "'");
    }

    ~GzipByteSource() override { inflateEnd(&strm_); }

    GzipByteSource(const GzipByteSource&) = delete;
    GzipByteSource& operator=(const GzipByteSource&) = delete;

    std::size_t read(char* out, std::size_t cap) override {
        if (finished_) return 0;
        strm_.next_out = reinterpret_cast<Bytef*>(out);
        strm_.avail_out = static_cast<uInt>(cap);
        while (strm_.avail_out > 0) {
            if (strm_.avail_in == 0) {
                std::size_t n = inner_->read(in_buf_.data(), in_buf_.size());
                if (n == 0) {
                    if (mid_member_)
                        throw IoError("truncated gzip stream in '" + inner_->name() + "'");
                    finished_ = true;
                    break;
                }
                strm_.next_in = reinterpret_cast<Bytef*>(in_buf_.data());
                strm_.avail_in = static_cast<uInt>(n);
            }
            int rc = inflate(&strm_, Z_NO_FLUSH);
            if (rc == Z_STREAM_END) {
                mid_member_ = false;
                // Another member may follow in the same file.
                if (inflateReset(&strm_) != Z_OK)
                    throw IoError("inflateReset failed for '" + inner_->name() + "'");
                continue;
            }
            if (rc != Z_OK && rc != Z_BUF_ERROR)
                throw IoError("corrupt gzip data in '" + inner_->name() + "': " +
                              (strm_.msg ? strm_.msg : "zlib error"));
            if (rc == Z_OK && strm_.avail_out > 0 && strm_.avail_in == 0) {
                mid_member_ = true;
                continue;  // need more input
            }
            if (rc == Z_BUF_ERROR && strm_.avail_in == 0) {
                mid_member_ = true;
                continue;
            }
        }
        return cap - strm_.avail_out;
    }

    const std::string& name() const noexcept override { return inner_->name(); }

private:
    static constexpr std::size_t kChunk = 1 << 16;

    std::unique_ptr<ByteSource> inner_;
    std::vector<char> in_buf_;
    z_stream strm_{};
    bool finished_ = false;
    bool mid_member_ = false;
};

enum class Compression { autodetect, none, gzip };

// Opens a file source, wrapping it in a gzip inflater when the compression
// flag says so or, under autodetect, when the 1f 8b magic bytes lead.
inline std::unique_ptr<ByteSource> open_byte_source(const std::string& path,
                                                    Compression compression = Compression::autodetect) {
    auto file = std::make_unique<FileByteSource>(path);
    if (compression == Compression::none) return file;
    if (compression == Compression::gzip) return std::make_unique<GzipByteSource>(std::move(file));

    char magic[2];
    std::size_t got = 0;
    while (got < 2) {
        std::size_t n = file->read(magic + got, 2 - got);
        if (n == 0) break;
        got += n;
    }
    auto replay = std::make_unique<PrefixedByteSource>(std::string(magic, got), std::move(file));
    if (got == 2 && static_cast<unsigned char>(magic[0]) == 0x1f &&
        static_cast<unsigned char>(magic[1]) == 0x8b)
        return std::make_unique<GzipByteSource>(std::move(replay));
    return replay;
}

}  // namespace misdx
