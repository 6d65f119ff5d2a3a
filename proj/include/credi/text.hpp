#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace credi::text {

/// Offset of the first byte that breaks UTF-8 well-formedness, or nullopt.
std::optional<std::size_t> find_invalid_utf8(std::string_view s) noexcept;

/// Byte length of the code point starting with `lead` (1 for stray bytes).
std::size_t code_point_length(unsigned char lead) noexcept;

/// Splits into code points, each as its UTF-8 byte sequence.
std::vector<std::string_view> code_points(std::string_view s);

bool is_ascii_word_char(char c) noexcept;

/// Trims ASCII whitespace plus U+3000 ideographic space.
std::string_view trim(std::string_view s) noexcept;

/// Non-overlapping occurrence count.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle) noexcept;

std::string to_lower_ascii(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace credi::text
