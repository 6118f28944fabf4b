#pragma once

#include <string>
#include <vector>

namespace jptdp {

// Splits a UTF-8 string into one std::string per code point. Bytes that do
// not form a valid sequence are passed through one byte at a time, so the
// concatenation of the pieces always equals the input.
inline std::vector<std::string> utf8_codepoints(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    if (i + len > s.size()) {
      len = 1;
    } else {
      for (std::size_t k = 1; k < len; ++k) {
        unsigned char c = static_cast<unsigned char>(s[i + k]);
        if ((c & 0xC0) != 0x80) {
          len = 1;
          break;
        }
      }
    }
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

// ASCII-only lowercasing; non-ASCII bytes are left untouched.
inline std::string lowercased(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace jptdp
