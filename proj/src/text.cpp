#include "itest/text.hpp"

#include <algorithm>
#include <cstdint>

#include <fmt/format.h>

#include "itest/python/lexer.hpp"

namespace itest::text {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < text.size()) lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

std::string reindent(std::string_view code, int remove, std::string_view prefix, const std::vector<int>& keep) {
  std::string out;
  auto lines = split_lines(code);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    int number = static_cast<int>(i) + 1;
    if (i > 0) out += '\n';
    if (std::find(keep.begin(), keep.end(), number) != keep.end()) {
      out += line;
      continue;
    }
    if (i > 0) {
      std::size_t n = 0;
      while (n < line.size() && static_cast<int>(n) < remove && (line[n] == ' ' || line[n] == '\t')) ++n;
      line.remove_prefix(n);
    }
    if (!line.empty()) {
      out += prefix;
      out += line;
    }
  }
  return out;
}

std::string py_string_literal(std::string_view value) {
  std::string out = "\"";
  for (char ch : value) {
    auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20 || c == 0x7f) {
          out += fmt::format("\\x{:02x}", c);
        } else {
          out += ch;
        }
    }
  }
  return out + "\"";
}

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool hex_value(std::string_view digits, std::uint32_t& value) {
  value = 0;
  for (char c : digits) {
    value <<= 4;
    if (c >= '0' && c <= '9') {
      value |= static_cast<std::uint32_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      value |= static_cast<std::uint32_t>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      value |= static_cast<std::uint32_t>(c - 'A' + 10);
    } else {
      return false;
    }
  }
  return true;
}

bool decode_body(std::string_view body, bool raw, std::string& out) {
  if (raw) {
    out += body;
    return true;
  }
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c != '\\' || i + 1 >= body.size()) {
      out += c;
      continue;
    }
    char e = body[++i];
    switch (e) {
      case '\n': break;
      case '\\': out += '\\'; break;
      case '\'': out += '\''; break;
      case '"': out += '"'; break;
      case 'a': out += '\a'; break;
      case 'b': out += '\b'; break;
      case 'f': out += '\f'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 't': out += '\t'; break;
      case 'v': out += '\v'; break;
      case 'x':
      case 'u':
      case 'U': {
        std::size_t width = e == 'x' ? 2 : e == 'u' ? 4 : 8;
        std::uint32_t cp;
        if (i + width >= body.size() || !hex_value(body.substr(i + 1, width), cp)) return false;
        if (cp > 0x10FFFF) return false;
        append_utf8(out, cp);
        i += width;
        break;
      }
      case 'N': return false;
      default:
        if (e >= '0' && e <= '7') {
          std::uint32_t cp = 0;
          std::size_t n = 0;
          while (n < 3 && i < body.size() && body[i] >= '0' && body[i] <= '7') {
            cp = cp * 8 + static_cast<std::uint32_t>(body[i] - '0');
            ++i;
            ++n;
          }
          --i;
          append_utf8(out, cp);
        } else {
          out += '\\';
          out += e;
        }
    }
  }
  return true;
}

}  // namespace

bool decode_string_literal(std::string_view source, std::string& out) {
  std::vector<py::Token> tokens;
  try {
    py::LexOptions options;
    options.bracketed = true;
    tokens = py::tokenize(source, options);
  } catch (const py::SyntaxError&) {
    return false;
  }
  out.clear();
  bool any = false;
  for (const auto& t : tokens) {
    if (t.kind == py::TokenKind::EndMarker || t.kind == py::TokenKind::Newline) continue;
    if (t.kind != py::TokenKind::String || t.bytes || t.fstring) return false;
    std::string_view text = t.text;
    std::size_t quote = text.find_first_of("'\"");
    text.remove_prefix(quote);
    std::size_t q = text.size() >= 6 && (text.substr(0, 3) == "'''" || text.substr(0, 3) == "\"\"\"") ? 3 : 1;
    if (!decode_body(text.substr(q, text.size() - 2 * q), t.raw, out)) return false;
    any = true;
  }
  return any;
}

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= text.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

}  // namespace itest::text
