#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace testgen {

struct Token {
  enum class Kind { Identifier, Number, String, Char, Punct, Comment, Preprocessor };

  Kind kind;
  std::string_view text;
  std::size_t offset;  // byte offset of the first character
  long line;           // 1-based
  long column;         // 1-based, in bytes

  bool is(std::string_view s) const { return text == s && kind != Kind::String && kind != Kind::Comment; }
  bool is_word() const { return kind == Kind::Identifier || kind == Kind::Number; }
  std::size_t end() const { return offset + text.size(); }
};

/// Splits C++ source into tokens. Comments and preprocessor lines (with
/// their continuations) are kept as single tokens; `::` and `->` are single
/// punctuators, every other punctuator is one character. Throws
/// Error(ParseFailure) on an unterminated literal or comment.
std::vector<Token> lex(std::string_view source);

}  // namespace testgen
