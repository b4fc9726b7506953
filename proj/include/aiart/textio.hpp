#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aiart {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Strict parse of a full decimal string; throws InvalidInput on junk.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

/// RFC 4180 field quoting (only when the field needs it).
std::string csv_escape(std::string_view field);

/// Splits one CSV record. Quoted fields may contain commas and doubled quotes.
std::vector<std::string> csv_split(std::string_view line);

std::string join(std::span<const std::string> parts, std::string_view sep);
std::vector<std::string> split(std::string_view text, char sep);
std::string to_lower(std::string_view text);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
/// Writes with LF line endings exactly as given.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// 64-bit FNV-1a; content fingerprint for the feature cache.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t value);

}  // namespace aiart
