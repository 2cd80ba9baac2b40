#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lorafl {

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
void write_text_file(const std::string& path, const std::string& text);

// CRC-32 of a byte buffer as 8 lowercase hex digits.
std::string crc32_hex(const std::vector<std::uint8_t>& bytes);
std::string crc32_hex_of_file(const std::string& path);

}  // namespace lorafl
