#pragma once

// Minimal JSON document model used for the canonical observation format.
// Unlike a general-purpose JSON library it keeps the byte offset of every
// node, so failures can be reported as line/column positions in resource
// files, and it writes objects in exactly the member order it was given.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace testgen::json {

struct Node;

struct Member;

struct Node {
  enum class Type { Null, Bool, Number, String, Array, Object };

  Type type = Type::Null;
  bool boolean = false;
  std::string text;  // string contents or number lexeme
  std::vector<Node> items;
  std::vector<Member> members;
  std::size_t offset = 0;  // byte offset of the first character

  static Node null() { return {}; }
  static Node string(std::string s);
  static Node number(std::string lexeme);
  static Node number(long long v);
  static Node boolean_value(bool v);
  static Node array();
  static Node object();

  bool is(Type t) const { return type == t; }

  Node& add(std::string key, Node value);
  const Node* find(std::string_view key) const;
  Node& push(Node value);
};

struct Member {
  std::string key;
  Node value;
};

/// Parses a complete document. Throws DocumentError(MalformedDocument) with
/// the byte offset of the first violation.
Node parse(std::string_view text);

/// Compact single-line rendering; members in stored order.
std::string write(const Node& node);

/// Indented rendering, two spaces per level, one member per line. Parsing the
/// result records, in each node's `offset`, where that node starts.
std::string write_pretty(const Node& node);

std::string escape(std::string_view s);

/// 1-based line/column of a byte offset.
std::pair<long, long> line_column(std::string_view text, std::size_t offset);

}  // namespace testgen::json
