#include "lorafl/io.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>

#include "lorafl/errors.hpp"

namespace lorafl {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open file: " + path);
  f.seekg(0, std::ios::end);
  const auto size = f.tellg();
  f.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  f.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!f) throw LengthError("short read on file: " + path);
  return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot open file for writing: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          std::streamsize(bytes.size()));
  if (!f) throw ValidationError("write failed: " + path);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot open file for writing: " + path);
  f << text;
  if (!f) throw ValidationError("write failed: " + path);
}

std::string crc32_hex(const std::vector<std::uint8_t>& bytes) {
  const auto crc = ::crc32(0L, bytes.data(), uInt(bytes.size()));
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

std::string crc32_hex_of_file(const std::string& path) {
  return crc32_hex(read_file(path));
}

}  // namespace lorafl
