#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

namespace xsap {

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// Decodes one UTF-8 scalar value starting at s[i]; advances i past it.
// Returns false on any ill-formed sequence (overlong, surrogate, > U+10FFFF,
// truncated) without advancing past the offending byte.
inline bool utf8_next(std::string_view s, std::size_t& i,
                      std::uint32_t& cp_out) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    cp_out = b0;
    ++i;
    return true;
  }
  int len;
  std::uint32_t cp;
  if ((b0 & 0xe0) == 0xc0) {
    len = 2;
    cp = b0 & 0x1f;
  } else if ((b0 & 0xf0) == 0xe0) {
    len = 3;
    cp = b0 & 0x0f;
  } else if ((b0 & 0xf8) == 0xf0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return false;
  }
  if (i + static_cast<std::size_t>(len) > s.size()) return false;
  for (int k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
    if ((b & 0xc0) != 0x80) return false;
    cp = (cp << 6) | (b & 0x3f);
  }
  static constexpr std::uint32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len]) return false;                  // overlong
  if (cp > 0x10ffff) return false;
  if (cp >= 0xd800 && cp <= 0xdfff) return false;    // surrogate
  cp_out = cp;
  i += static_cast<std::size_t>(len);
  return true;
}

inline bool utf8_valid(std::string_view s) {
  std::size_t i = 0;
  std::uint32_t cp;
  while (i < s.size())
    if (!utf8_next(s, i, cp)) return false;
  return true;
}

inline std::size_t codepoint_count(std::string_view s) {
  std::size_t i = 0, n = 0;
  std::uint32_t cp;
  while (i < s.size()) {
    if (!utf8_next(s, i, cp)) return n;  // caller validates beforehand
    ++n;
  }
  return n;
}

// First max_chars scalar values of a valid UTF-8 string.
inline std::string_view truncate_codepoints(std::string_view s,
                                            std::size_t max_chars) {
  std::size_t i = 0, n = 0;
  std::uint32_t cp;
  while (i < s.size() && n < max_chars) {
    if (!utf8_next(s, i, cp)) break;
    ++n;
  }
  return s.substr(0, i);
}

// Unicode NFC via ICU. Input must be valid UTF-8 (check utf8_valid first;
// ICU would silently substitute U+FFFD otherwise).
inline std::string nfc(std::string_view s) {
  // Pure ASCII is already NFC; skip the ICU round trip.
  bool ascii = true;
  for (char c : s)
    if (static_cast<unsigned char>(c) >= 0x80) {
      ascii = false;
      break;
    }
  if (ascii) return std::string(s);

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || norm == nullptr) return std::string(s);
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  icu::UnicodeString out = norm->normalize(in, status);
  if (U_FAILURE(status)) return std::string(s);
  std::string result;
  out.toUTF8String(result);
  return result;
}

// ASCII-only lowercasing. Deliberately not locale- or ICU-backed: feature
// ids must hash identically on every platform and library version, so the
// fold is frozen to the A-Z range.
inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace xsap
