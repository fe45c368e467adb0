#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace biaseval::unicode {

/// NFC-normalizes a UTF-8 string. Throws InputError on invalid UTF-8.
std::string nfc(std::string_view utf8);

/// Locale-independent lowercase of a UTF-8 string.
std::string lower(std::string_view utf8);

/// Maximal runs of letters, digits and combining marks; everything else
/// (whitespace, punctuation, symbols) separates words.
std::vector<std::string> words(std::string_view utf8);

/// True if the string contains at least one Devanagari code point.
bool has_devanagari(std::string_view utf8);

/// True if the string contains at least one Latin letter.
bool has_latin(std::string_view utf8);

}  // namespace biaseval::unicode
