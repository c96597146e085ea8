#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace csrnn {

// Decodes UTF-8 into Unicode scalar values. Throws FeatureError on invalid
// sequences (overlongs, surrogates and truncation included).
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view scalars);
bool is_valid_utf8(std::string_view bytes);

// ASCII-only case folding.
std::string ascii_lower(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace csrnn
