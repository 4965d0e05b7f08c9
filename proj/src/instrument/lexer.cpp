#include "testgen/instrument/lexer.hpp"

#include <cctype>

#include "testgen/model/errors.hpp"

namespace testgen {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || (c & 0x80); }
bool ident_char(char c) { return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    bool line_start = true;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        advance(1);
        line_start = true;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
        continue;
      }
      std::size_t start = pos_;
      long line = line_, col = col_;
      Token::Kind kind;
      if (c == '#' && line_start) {
        directive();
        kind = Token::Kind::Preprocessor;
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
        kind = Token::Kind::Comment;
      } else if (c == '/' && peek(1) == '*') {
        block_comment();
        kind = Token::Kind::Comment;
      } else if (raw_string_ahead()) {
        raw_string();
        kind = Token::Kind::String;
      } else if (ident_start(c)) {
        while (pos_ < src_.size() && ident_char(src_[pos_])) advance(1);
        // Encoding prefixes glue onto a following literal.
        std::string_view word = src_.substr(start, pos_ - start);
        if ((word == "L" || word == "u" || word == "U" || word == "u8") && pos_ < src_.size() &&
            (src_[pos_] == '"' || src_[pos_] == '\'')) {
          char q = src_[pos_];
          quoted(q);
          kind = q == '"' ? Token::Kind::String : Token::Kind::Char;
        } else {
          kind = Token::Kind::Identifier;
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
        number();
        kind = Token::Kind::Number;
      } else if (c == '"' || c == '\'') {
        quoted(c);
        kind = c == '"' ? Token::Kind::String : Token::Kind::Char;
      } else {
        if ((c == ':' && peek(1) == ':') || (c == '-' && peek(1) == '>')) {
          advance(2);
        } else {
          advance(1);
        }
        kind = Token::Kind::Punct;
      }
      line_start = false;
      out.push_back(Token{kind, src_.substr(start, pos_ - start), start, line, col});
    }
    return out;
  }

 private:
  char peek(std::size_t ahead) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& what, long line) {
    throw Error(ErrorCode::ParseFailure, what + " starting at line " + std::to_string(line));
  }

  void directive() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\\' && peek(1) == '\n') {
        advance(2);
        continue;
      }
      if (c == '\n') return;
      if (c == '/' && peek(1) == '*') {
        block_comment();
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
        return;
      }
      advance(1);
    }
  }

  void block_comment() {
    long line = line_;
    advance(2);
    while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/')) advance(1);
    if (pos_ >= src_.size()) fail("unterminated comment", line);
    advance(2);
  }

  void quoted(char q) {
    long line = line_;
    advance(1);
    while (pos_ < src_.size() && src_[pos_] != q) {
      if (src_[pos_] == '\\') advance(1);
      if (pos_ < src_.size() && src_[pos_] == '\n') fail("unterminated literal", line);
      advance(1);
    }
    if (pos_ >= src_.size()) fail("unterminated literal", line);
    advance(1);
  }

  bool raw_string_ahead() const {
    std::size_t p = pos_;
    for (std::string_view prefix : {"u8R\"", "uR\"", "UR\"", "LR\"", "R\""}) {
      if (src_.substr(p, prefix.size()) == prefix) return p == 0 || !ident_char(src_[p - 1]);
    }
    return false;
  }

  void raw_string() {
    long line = line_;
    while (src_[pos_] != '"') advance(1);
    advance(1);
    std::size_t delim_start = pos_;
    while (pos_ < src_.size() && src_[pos_] != '(') advance(1);
    std::string close = ")" + std::string(src_.substr(delim_start, pos_ - delim_start)) + "\"";
    std::size_t end = src_.find(close, pos_);
    if (end == std::string_view::npos) fail("unterminated raw string", line);
    advance(end + close.size() - pos_);
  }

  void number() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if ((c == '+' || c == '-') && pos_ > 0 &&
          (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E' || src_[pos_ - 1] == 'p' || src_[pos_ - 1] == 'P')) {
        advance(1);
      } else if (ident_char(c) || c == '.' || c == '\'') {
        advance(1);
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  long line_ = 1;
  long col_ = 1;
};

}  // namespace

std::vector<Token> lex(std::string_view source) { return Lexer(source).run(); }

}  // namespace testgen
