#include "icv/utf8.h"

#include <vector>

#include "icv/error.h"

namespace icv {
namespace utf8 {
namespace {

// Returns the scalar value at `pos` and advances it; throws on bad input.
char32_t Next(std::string_view s, size_t &pos) {
  auto byte = [&](size_t i) { return static_cast<unsigned char>(s[i]); };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) {
    ++pos;
    return lead;
  }
  int extra;
  char32_t cp;
  char32_t min;
  if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
    min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
    min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
    min = 0x10000;
  } else {
    throw Error(ErrorCode::kParse,
                "invalid UTF-8 lead byte at offset " + std::to_string(pos));
  }
  if (pos + extra >= s.size()) {
    throw Error(ErrorCode::kParse,
                "truncated UTF-8 sequence at offset " + std::to_string(pos));
  }
  for (int i = 1; i <= extra; ++i) {
    const unsigned char b = byte(pos + i);
    if ((b & 0xC0) != 0x80) {
      throw Error(ErrorCode::kParse, "invalid UTF-8 continuation at offset " +
                                         std::to_string(pos + i));
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    throw Error(ErrorCode::kParse,
                "invalid UTF-8 scalar at offset " + std::to_string(pos));
  }
  pos += extra + 1;
  return cp;
}

void Append(std::string &out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace

std::u32string Decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  size_t pos = 0;
  while (pos < text.size()) out.push_back(Next(text, pos));
  return out;
}

std::string Encode(std::u32string_view codepoints) {
  std::string out;
  out.reserve(codepoints.size());
  for (char32_t cp : codepoints) Append(out, cp);
  return out;
}

bool IsValid(std::string_view text) {
  try {
    size_t pos = 0;
    while (pos < text.size()) Next(text, pos);
    return true;
  } catch (const Error &) {
    return false;
  }
}

size_t Length(std::string_view text) {
  size_t n = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    Next(text, pos);
    ++n;
  }
  return n;
}

std::string Substr(std::string_view text, size_t start, size_t end) {
  // Byte offset of every scalar boundary, including the one past the end.
  std::vector<size_t> boundaries;
  size_t pos = 0;
  while (pos < text.size()) {
    boundaries.push_back(pos);
    Next(text, pos);
  }
  boundaries.push_back(text.size());
  if (start > end || end >= boundaries.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "substring [" + std::to_string(start) + "," +
                    std::to_string(end) + ") out of bounds");
  }
  return std::string(
      text.substr(boundaries[start], boundaries[end] - boundaries[start]));
}

bool IsWhitespace(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

char32_t ToLower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  return c;
}

}  // namespace utf8
}  // namespace icv
