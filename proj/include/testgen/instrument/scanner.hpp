#pragma once

// Declaration-level scan of one C++ translation unit: namespaces, classes
// and their member access, function definitions, marker comments,
// reflection registrations and local includes.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "testgen/instrument/lexer.hpp"
#include "testgen/model/value.hpp"

namespace testgen {

enum class Access { Public, Protected, Private };

struct ParamInfo {
  std::string type;  // canonical spelling
  std::string name;
  long line = -1;
  long column = -1;
};

struct MemberInfo {
  bool is_static = false;
  Access access = Access::Public;
};

struct ClassInfo {
  std::string qualified_name;
  std::string ns;
  std::map<std::string, MemberInfo> members;  // by member function name
};

struct FunctionInfo {
  std::string name;
  std::string ns;         // enclosing namespace ("" for global)
  std::string container;  // qualified class, or the namespace for free functions
  std::string qualifier;  // as written before the name in an out-of-class definition
  std::string return_type;
  std::string return_type_text;  // as written, for declaring the temporary
  std::vector<ParamInfo> params;
  std::string parameter_text;  // the parameter list as written, without parentheses
  bool in_class = false;
  bool is_static = false;
  bool has_receiver = false;
  Access access = Access::Public;
  bool marked = false;
  std::optional<std::string> unsupported;  // reason the function cannot be a target
  long line = 0;
  long column = 0;
  std::size_t body_open = 0;   // token index of the body's '{'
  std::size_t body_close = 0;  // token index of the matching '}'

  std::string signature() const;
  MethodId method_id(const std::string& file_path) const;
};

struct MarkerIssue {
  long line;
  long column;
  std::string reason;
};

struct ScanResult {
  std::vector<Token> tokens;
  std::vector<FunctionInfo> functions;  // every definition found at namespace or class scope
  std::vector<ClassInfo> classes;
  std::vector<std::string> registrations;  // classes registered for reflection
  std::vector<std::string> local_includes; // "..." includes as written
  std::vector<MarkerIssue> marker_issues;  // markers not attached to a supported definition site
  bool has_main = false;
  bool already_instrumented = false;
};

inline constexpr std::string_view kDefaultAnnotation = "GenerateTestCases";
inline constexpr std::string_view kInstrumentedMarker = "testgen-instrumented";

/// Throws Error(ParseFailure) with the line when braces do not balance.
ScanResult scan_source(std::string_view source, std::string_view annotation = kDefaultAnnotation);

/// Joins tokens, inserting a space only between two word tokens.
std::string canonical_text(const std::vector<Token>& tokens, std::size_t begin, std::size_t end);

}  // namespace testgen
