#include "testgen/model/json_text.hpp"

#include <cctype>
#include <cstdio>

#include "testgen/model/errors.hpp"

namespace testgen::json {

Node Node::string(std::string s) {
  Node n;
  n.type = Type::String;
  n.text = std::move(s);
  return n;
}

Node Node::number(std::string lexeme) {
  Node n;
  n.type = Type::Number;
  n.text = std::move(lexeme);
  return n;
}

Node Node::number(long long v) { return number(std::to_string(v)); }

Node Node::boolean_value(bool v) {
  Node n;
  n.type = Type::Bool;
  n.boolean = v;
  return n;
}

Node Node::array() {
  Node n;
  n.type = Type::Array;
  return n;
}

Node Node::object() {
  Node n;
  n.type = Type::Object;
  return n;
}

Node& Node::add(std::string key, Node value) {
  members.push_back(Member{std::move(key), std::move(value)});
  return members.back().value;
}

const Node* Node::find(std::string_view key) const {
  for (const auto& m : members) {
    if (m.key == key) return &m.value;
  }
  return nullptr;
}

Node& Node::push(Node value) {
  items.push_back(std::move(value));
  return items.back();
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Node document() {
    skip_ws();
    Node n = value(0);
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after document");
    return n;
  }

 private:
  static constexpr int kMaxNesting = 4096;

  [[noreturn]] void fail(const std::string& reason) const {
    throw DocumentError(ErrorCode::MalformedDocument, pos_, reason);
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\n' || c == '\r' || c == '\t') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  char peek() const {
    if (pos_ >= text_.size()) fail("unexpected end of document");
    return text_[pos_];
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void literal(std::string_view word) {
    if (text_.substr(pos_, word.size()) != word) fail("invalid literal");
    pos_ += word.size();
  }

  Node value(int nesting) {
    if (nesting > kMaxNesting) fail("nesting too deep");
    std::size_t start = pos_;
    Node n;
    switch (peek()) {
      case '{':
        n = object(nesting);
        break;
      case '[':
        n = array(nesting);
        break;
      case '"':
        n = Node::string(string());
        break;
      case 't':
        literal("true");
        n = Node::boolean_value(true);
        break;
      case 'f':
        literal("false");
        n = Node::boolean_value(false);
        break;
      case 'n':
        literal("null");
        break;
      default:
        n = Node::number(number());
        break;
    }
    n.offset = start;
    return n;
  }

  Node object(int nesting) {
    expect('{');
    Node n = Node::object();
    skip_ws();
    if (peek() == '}') {
      ++pos_;
      return n;
    }
    while (true) {
      skip_ws();
      if (peek() != '"') fail("expected member name");
      std::string key = string();
      skip_ws();
      expect(':');
      skip_ws();
      n.add(std::move(key), value(nesting + 1));
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      return n;
    }
  }

  Node array(int nesting) {
    expect('[');
    Node n = Node::array();
    skip_ws();
    if (peek() == ']') {
      ++pos_;
      return n;
    }
    while (true) {
      skip_ws();
      n.push(value(nesting + 1));
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect(']');
      return n;
    }
  }

  std::string number() {
    std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
    std::size_t digits = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '.' || text_[pos_] == 'e' ||
                                   text_[pos_] == 'E' || text_[pos_] == '+' ||
                                   text_[pos_] == '-')) {
      ++pos_;
    }
    if (pos_ == digits) fail("unexpected character");
    return std::string(text_.substr(start, pos_ - start));
  }

  static void append_utf8(std::string& out, unsigned cp) {
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

  unsigned hex4() {
    if (pos_ + 4 > text_.size()) fail("truncated unicode escape");
    unsigned v = 0;
    for (int i = 0; i < 4; ++i) {
      char c = text_[pos_++];
      v <<= 4;
      if (c >= '0' && c <= '9') {
        v |= static_cast<unsigned>(c - '0');
      } else if (c >= 'a' && c <= 'f') {
        v |= static_cast<unsigned>(c - 'a' + 10);
      } else if (c >= 'A' && c <= 'F') {
        v |= static_cast<unsigned>(c - 'A' + 10);
      } else {
        fail("invalid unicode escape");
      }
    }
    return v;
  }

  std::string string() {
    expect('"');
    std::string out;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated string");
      char c = text_[pos_++];
      if (c == '"') return out;
      if (static_cast<unsigned char>(c) < 0x20) fail("control character in string");
      if (c != '\\') {
        out += c;
        continue;
      }
      if (pos_ >= text_.size()) fail("unterminated escape");
      char e = text_[pos_++];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case '/': out += '/'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case 't': out += '\t'; break;
        case 'u': {
          unsigned cp = hex4();
          if (cp >= 0xD800 && cp < 0xDC00 && text_.substr(pos_, 2) == "\\u") {
            pos_ += 2;
            unsigned lo = hex4();
            cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
          }
          append_utf8(out, cp);
          break;
        }
        default:
          --pos_;
          fail("invalid escape");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void write_node(const Node& n, std::string& out, int indent, int level) {
  auto newline = [&](int lvl) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * lvl), ' ');
  };
  switch (n.type) {
    case Node::Type::Null:
      out += "null";
      break;
    case Node::Type::Bool:
      out += n.boolean ? "true" : "false";
      break;
    case Node::Type::Number:
      out += n.text;
      break;
    case Node::Type::String:
      out += '"';
      out += escape(n.text);
      out += '"';
      break;
    case Node::Type::Array:
      out += '[';
      for (std::size_t i = 0; i < n.items.size(); ++i) {
        if (i) out += ',';
        newline(level + 1);
        write_node(n.items[i], out, indent, level + 1);
      }
      if (!n.items.empty()) newline(level);
      out += ']';
      break;
    case Node::Type::Object:
      out += '{';
      for (std::size_t i = 0; i < n.members.size(); ++i) {
        if (i) out += ',';
        newline(level + 1);
        out += '"';
        out += escape(n.members[i].key);
        out += indent < 0 ? "\":" : "\": ";
        write_node(n.members[i].value, out, indent, level + 1);
      }
      if (!n.members.empty()) newline(level);
      out += '}';
      break;
  }
}

}  // namespace

Node parse(std::string_view text) { return Parser(text).document(); }

std::string write(const Node& node) {
  std::string out;
  write_node(node, out, -1, 0);
  return out;
}

std::string write_pretty(const Node& node) {
  std::string out;
  write_node(node, out, 2, 0);
  return out;
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(c));
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::pair<long, long> line_column(std::string_view text, std::size_t offset) {
  long line = 1;
  long col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace testgen::json
