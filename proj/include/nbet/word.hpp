#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "nbet/error.hpp"

namespace nbet {

/// Word over an alphabet, as letter indices.
using Word = std::vector<std::size_t>;
using Alphabet = std::vector<std::string>;

inline std::size_t utf8_char_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); i += utf8_char_len(static_cast<unsigned char>(s[i]))) ++n;
  return n;
}

inline std::size_t symbol_index(const Alphabet& alphabet, std::string_view sym) {
  for (std::size_t a = 0; a < alphabet.size(); ++a)
    if (alphabet[a] == sym) return a;
  fail(ErrorKind::UnknownSymbol, "unknown symbol '" + std::string(sym) + "'");
}

inline bool single_char_symbols(const Alphabet& alphabet) {
  for (const auto& s : alphabet)
    if (utf8_length(s) != 1) return false;
  return true;
}

/// One symbol per code point when every symbol is a single character,
/// comma separated otherwise.
inline Word parse_word(const Alphabet& alphabet, std::string_view text) {
  Word w;
  if (text.empty()) return w;
  if (single_char_symbols(alphabet)) {
    for (std::size_t i = 0; i < text.size();) {
      const std::size_t len = utf8_char_len(static_cast<unsigned char>(text[i]));
      w.push_back(symbol_index(alphabet, text.substr(i, len)));
      i += len;
    }
    return w;
  }
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    w.push_back(symbol_index(alphabet, text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                           : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return w;
}

inline std::string format_word(const Alphabet& alphabet, const Word& w) {
  const bool compact = single_char_symbols(alphabet);
  std::string s;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!compact && k) s += ",";
    s += alphabet.at(w[k]);
  }
  return s;
}

}  // namespace nbet
