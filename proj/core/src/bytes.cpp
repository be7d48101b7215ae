#include "rpksim/bytes.hpp"

#include <algorithm>

namespace rpksim {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

std::string to_hex(ByteView data) {
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw DecodeError("hex", "odd length");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_value(hex[i]);
    int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) throw DecodeError("hex", "invalid digit");
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

std::string fingerprint(ByteView data, std::size_t octets) {
  return to_hex(data.first(std::min(octets, data.size())));
}

Bytes to_bytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

Bytes concat(ByteView a, ByteView b) {
  Bytes out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void append(Bytes& out, ByteView data) { out.insert(out.end(), data.begin(), data.end()); }

bool contains_subsequence(ByteView haystack, ByteView needle) {
  if (needle.empty()) return true;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

void ByteWriter::u32(std::uint32_t v) {
  out_.push_back(static_cast<std::uint8_t>(v >> 24));
  out_.push_back(static_cast<std::uint8_t>(v >> 16));
  out_.push_back(static_cast<std::uint8_t>(v >> 8));
  out_.push_back(static_cast<std::uint8_t>(v));
}

void ByteWriter::field(std::uint8_t tag, ByteView value) {
  u8(tag);
  u32(static_cast<std::uint32_t>(value.size()));
  raw(value);
}

void ByteWriter::field(std::uint8_t tag, std::string_view value) {
  auto* p = reinterpret_cast<const std::uint8_t*>(value.data());
  field(tag, ByteView(p, value.size()));
}

std::uint8_t ByteReader::u8(const char* field) {
  if (remaining() < 1) throw DecodeError(field, "truncated");
  return data_[pos_++];
}

std::uint32_t ByteReader::u32(const char* field) {
  if (remaining() < 4) throw DecodeError(field, "truncated length");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
  return v;
}

ByteView ByteReader::take(std::size_t n, const char* field) {
  if (remaining() < n) throw DecodeError(field, "truncated value");
  ByteView out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

ByteView ByteReader::field(std::uint8_t tag, const char* field) {
  std::uint8_t got = u8(field);
  if (got != tag) throw DecodeError(field, "unexpected tag " + std::to_string(got));
  std::uint32_t len = u32(field);
  return take(len, field);
}

std::string ByteReader::text_field(std::uint8_t tag, const char* field) {
  ByteView v = this->field(tag, field);
  return std::string(v.begin(), v.end());
}

bool ByteReader::peek_tag(std::uint8_t& tag) const {
  if (at_end()) return false;
  tag = data_[pos_];
  return true;
}

void ByteReader::expect_end(const char* field) const {
  if (!at_end()) throw DecodeError(field, std::to_string(remaining()) + " trailing octets");
}

}  // namespace rpksim
