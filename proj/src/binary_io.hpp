#pragma once

// Little-endian framing shared by the user-table and checkpoint formats:
// 8-byte magic, u64 header length, JSON header, raw float64 payload.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "rumor/errors.hpp"

namespace rumor::binary {

inline void write_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

inline void write_doubles(std::ostream& out, std::span<const double> values) {
  for (double v : values) write_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void write_header(std::ostream& out, std::string_view magic, const std::string& json) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  write_u64(out, json.size());
  out.write(json.data(), static_cast<std::streamsize>(json.size()));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string bytes(std::size_t n) {
    std::string buf(n, '\0');
    in_.read(buf.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("unexpected end of file");
    return buf;
  }

  std::uint64_t u64() {
    const std::string b = bytes(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
  }

  /// Length-prefixed JSON header text.
  std::string header() {
    const std::uint64_t n = u64();
    if (n > (std::uint64_t{1} << 32)) throw FormatError("corrupt header length");
    return bytes(n);
  }

  void doubles(std::span<double> out) {
    for (double& v : out) v = std::bit_cast<double>(u64());
  }

  /// Checks the 8-byte magic: same 6-byte family with another version is a
  /// version error, anything else is a foreign file.
  void expect_magic(std::string_view magic, std::string_view what) {
    std::string got(8, '\0');
    in_.read(got.data(), 8);
    got.resize(static_cast<std::size_t>(in_.gcount()));
    if (got == magic) return;
    if (got.size() == 8 && got.compare(0, 6, magic.substr(0, 6)) == 0) {
      throw FormatError("unsupported " + std::string(what) + " version " + got.substr(6));
    }
    throw FormatError("not a " + std::string(what) + " file");
  }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after payload");
  }

 private:
  std::istream& in_;
};

}  // namespace rumor::binary
