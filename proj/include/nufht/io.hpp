#ifndef NUFHT_IO_HPP
#define NUFHT_IO_HPP

// Real arrays on disk. Text files hold one number per line (blank lines are
// skipped) and are written with 17 significant digits, so a text round trip
// reproduces every bit. Binary files are raw little-endian IEEE 754 doubles.

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nufht {

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

enum class ArrayFormat { text, binary };

inline ArrayFormat parse_array_format(std::string_view name) {
  if (name == "text") return ArrayFormat::text;
  if (name == "binary") return ArrayFormat::binary;
  throw std::invalid_argument("unknown array format '" + std::string(name) + "' (expected text or binary)");
}

namespace detail {

inline std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

inline std::vector<double> parse_text_array(std::string_view content, const std::string& source = "input") {
  std::vector<double> values;
  std::size_t line_no = 0;
  while (!content.empty()) {
    const auto eol = content.find('\n');
    const auto line = detail::trim(content.substr(0, eol));
    content = eol == std::string_view::npos ? std::string_view{} : content.substr(eol + 1);
    ++line_no;
    if (line.empty()) continue;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(v)) {
      throw IoError(source + ":" + std::to_string(line_no) + ": not a finite number: '" + std::string(line) + "'");
    }
    values.push_back(v);
  }
  return values;
}

inline std::vector<double> read_array(const std::string& path, ArrayFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on '" + path + "'");
  if (format == ArrayFormat::text) return parse_text_array(content, path);

  if (content.size() % 8 != 0) {
    throw IoError("'" + path + "' holds " + std::to_string(content.size()) +
                  " bytes, not a whole number of 8-byte doubles");
  }
  std::vector<double> values(content.size() / 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, content.data() + 8 * i, 8);
    values[i] = std::bit_cast<double>(detail::to_little_endian(bits));
    if (!std::isfinite(values[i])) throw IoError("'" + path + "' entry " + std::to_string(i) + " is not finite");
  }
  return values;
}

inline void write_array(const std::string& path, std::span<const double> values, ArrayFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (format == ArrayFormat::text) {
    char buf[32];
    for (double v : values) {
      const int len = std::snprintf(buf, sizeof buf, "%.17g\n", v);
      out.write(buf, len);
    }
  } else {
    for (double v : values) {
      const std::uint64_t bits = detail::to_little_endian(std::bit_cast<std::uint64_t>(v));
      char bytes[8];
      std::memcpy(bytes, &bits, 8);
      out.write(bytes, 8);
    }
  }
  out.flush();
  if (!out) throw IoError("write error on '" + path + "'");
}

}  // namespace nufht

#endif  // NUFHT_IO_HPP
