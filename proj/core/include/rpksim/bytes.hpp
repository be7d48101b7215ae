#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rpksim {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);

// First `octets` bytes of `data` in hex; used wherever keys and secrets are
// printed into traces and reports.
std::string fingerprint(ByteView data, std::size_t octets = 8);

Bytes to_bytes(std::string_view text);
Bytes concat(ByteView a, ByteView b);
void append(Bytes& out, ByteView data);

// True if `needle` occurs as a contiguous run inside `haystack`.
bool contains_subsequence(ByteView haystack, ByteView needle);

class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Big-endian writer/reader pair for the tag-length-value encoding.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v);
  void raw(ByteView data) { append(out_, data); }
  // tag(1) | length(4) | value
  void field(std::uint8_t tag, ByteView value);
  void field(std::uint8_t tag, std::string_view value);

  const Bytes& bytes() const& { return out_; }
  Bytes bytes() && { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint8_t u8(const char* field);
  std::uint32_t u32(const char* field);
  ByteView take(std::size_t n, const char* field);
  // Reads one field, insisting on the expected tag.
  ByteView field(std::uint8_t tag, const char* field);
  std::string text_field(std::uint8_t tag, const char* field);
  // Peeks at the next tag without consuming; returns false at end of input.
  bool peek_tag(std::uint8_t& tag) const;

  bool at_end() const noexcept { return pos_ == data_.size(); }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  void expect_end(const char* field) const;

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace rpksim
