#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small UTF-8 helpers shared by the filters and the embedding lookup.
namespace wikisem::text {

/// Decodes UTF-8; ill-formed sequences become U+FFFD.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view code_points);

bool is_decimal_digit(char32_t c);
bool is_kana(char32_t c);

/// Removes every Unicode decimal digit (general category Nd).
std::string strip_digits(std::string_view utf8);

/// Simple Unicode case folding.
std::string fold_case(std::string_view utf8);

/// Splits on ASCII whitespace runs.
std::vector<std::string_view> split_whitespace(std::string_view s);

/// Title comparison key: underscores read as spaces.
std::string normalize_title(std::string_view title);

} // namespace wikisem::text
