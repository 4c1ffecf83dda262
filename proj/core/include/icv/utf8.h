#ifndef ICV_UTF8_H_
#define ICV_UTF8_H_

#include <cstddef>
#include <string>
#include <string_view>

namespace icv {
namespace utf8 {

// Decodes UTF-8 into Unicode scalar values. Throws Error(kParse) on
// malformed input (overlongs, surrogates and truncated sequences included).
std::u32string Decode(std::string_view text);

std::string Encode(std::u32string_view codepoints);

bool IsValid(std::string_view text);

// Number of scalar values in `text`.
size_t Length(std::string_view text);

// Substring by scalar-value offsets [start, end).
std::string Substr(std::string_view text, size_t start, size_t end);

bool IsWhitespace(char32_t c);

// Simple case folding: ASCII and Latin-1 uppercase letters map to lowercase,
// everything else is left untouched.
char32_t ToLower(char32_t c);

}  // namespace utf8
}  // namespace icv

#endif  // ICV_UTF8_H_
