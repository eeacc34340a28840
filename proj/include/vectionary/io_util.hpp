/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vectionary {

/// Shortest decimal representation that round-trips the exact double.
/// Used for every numeric field we serialize, so outputs are byte-stable.
std::string format_double(double value);

/// Locale-independent parses; empty/garbage input -> nullopt.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

/// Split one delimited row. Supports double-quoted fields with "" escapes;
/// does not support embedded newlines (rows are physical lines).
std::vector<std::string> split_delimited(std::string_view line, char delimiter);

/// Join fields with a delimiter, quoting any field that needs it.
std::string join_delimited(const std::vector<std::string>& fields, char delimiter);

/// Pick ',' or '\t' by which occurs in the header line ('\t' wins if present).
char sniff_delimiter(std::string_view header_line);

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view s);

/// FNV-1a, 64-bit. Non-cryptographic; used for manifests and dedupe keys.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Streaming FNV-1a over a whole file. Throws io_error if unreadable.
std::uint64_t digest_file(const std::string& path);

std::string hex64(std::uint64_t value);

/// Read a whole text file (throws io_error on failure).
std::string read_file(const std::string& path);

/// Write a file atomically enough for our purposes (truncate + write).
void write_file(const std::string& path, std::string_view content);

}  // namespace vectionary
