#include "biaseval/unicode.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "biaseval/error.hpp"

namespace biaseval::unicode {
namespace {

icu::UnicodeString decode(std::string_view utf8) {
  // Reject malformed input up front; ICU would silently substitute U+FFFD.
  std::int32_t i = 0;
  const auto* s = reinterpret_cast<const std::uint8_t*>(utf8.data());
  const auto n = static_cast<std::int32_t>(utf8.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    if (c < 0) throw InputError("invalid UTF-8 in \"" + std::string(utf8) + "\"");
  }
  return icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), n));
}

std::string encode(const icu::UnicodeString& text) {
  std::string out;
  text.toUTF8String(out);
  return out;
}

bool any_script(std::string_view utf8, UScriptCode script) {
  std::int32_t i = 0;
  const auto* s = reinterpret_cast<const std::uint8_t*>(utf8.data());
  const auto n = static_cast<std::int32_t>(utf8.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    if (c < 0) continue;
    UErrorCode status = U_ZERO_ERROR;
    if (uscript_getScript(c, &status) == script && U_SUCCESS(status)) return true;
  }
  return false;
}

}  // namespace

std::string nfc(std::string_view utf8) {
  bool ascii = true;
  for (unsigned char c : utf8) ascii = ascii && c < 0x80;
  if (ascii) return std::string(utf8);

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString out = norm->normalize(decode(utf8), status);
  if (U_FAILURE(status)) throw InputError("NFC normalization failed");
  return encode(out);
}

std::string lower(std::string_view utf8) {
  bool ascii = true;
  for (unsigned char c : utf8) ascii = ascii && c < 0x80;
  if (ascii) {
    std::string out(utf8);
    for (char& c : out) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
  }
  icu::UnicodeString text = decode(utf8);
  text.toLower(icu::Locale::getRoot());
  return encode(text);
}

std::vector<std::string> words(std::string_view utf8) {
  std::vector<std::string> out;
  std::string current;
  std::int32_t i = 0;
  const auto* s = reinterpret_cast<const std::uint8_t*>(utf8.data());
  const auto n = static_cast<std::int32_t>(utf8.size());
  while (i < n) {
    std::int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, n, c);
    bool word_char = c >= 0 && (u_isalnum(c) || u_getCombiningClass(c) > 0 ||
                                u_charType(c) == U_NON_SPACING_MARK ||
                                u_charType(c) == U_COMBINING_SPACING_MARK);
    if (word_char) {
      current.append(utf8.substr(start, i - start));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

bool has_devanagari(std::string_view utf8) { return any_script(utf8, USCRIPT_DEVANAGARI); }

bool has_latin(std::string_view utf8) { return any_script(utf8, USCRIPT_LATIN); }

}  // namespace biaseval::unicode
