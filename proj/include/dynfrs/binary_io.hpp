#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "dynfrs/errors.hpp"

namespace dynfrs {

static_assert(std::endian::native == std::endian::little,
              "snapshot encoding assumes a little-endian host");

// Little-endian, fixed-width field writer for model snapshots. Only
// arithmetic values, strings and vectors of arithmetic values are written;
// no struct is dumped raw, so padding never reaches the file.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.write(buf, sizeof(T));
  }

  void put_string(const std::string& s) {
    put<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put_vector(const std::vector<T>& v) {
    put<std::uint64_t>(v.size());
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(T)));
  }

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    char buf[sizeof(T)];
    read(buf, sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }

  std::string get_string() {
    std::string s(checked_size(1), '\0');
    read(s.data(), s.size());
    return s;
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  std::vector<T> get_vector() {
    std::vector<T> v(checked_size(sizeof(T)));
    read(reinterpret_cast<char*>(v.data()), v.size() * sizeof(T));
    return v;
  }

 private:
  std::size_t checked_size(std::size_t elem) {
    const auto n = get<std::uint64_t>();
    if (n > (std::uint64_t{1} << 40) / elem) throw ParseError("snapshot: implausible length");
    return static_cast<std::size_t>(n);
  }

  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw ParseError("snapshot: truncated");
  }

  std::istream& in_;
};

}  // namespace dynfrs
