#pragma once

// Source-to-source pass over a tree: finds marked functions and rewrites them
// to log their receiver, parameters and returns.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "testgen/instrument/scanner.hpp"
#include "testgen/model/diagnostics.hpp"
#include "testgen/model/value.hpp"

namespace testgen {

struct Target {
  std::string file;  // relative to the source root
  FunctionInfo function;
  MethodId method;
  /// Declaration to repeat in a test when the function is not declared in
  /// any header ("" otherwise).
  std::string forward_declaration;
};

struct SourceFile {
  std::string rel_path;
  std::string text;
  ScanResult scan;
  /// Quoted includes resolved to paths relative to the source root.
  std::vector<std::string> resolved_includes;
};

struct InstrumentationPlan {
  std::filesystem::path source_root;
  std::string annotation{kDefaultAnnotation};
  std::vector<Target> targets;
  std::vector<SourceFile> files;
  std::map<std::string, ClassInfo> classes;
  /// Registered class -> header (relative path) holding its registration.
  std::map<std::string, std::string> type_index;

  const SourceFile* file(const std::string& rel_path) const;
};

bool is_source_file(const std::filesystem::path& p);

/// Scans every C++ file under `source_root`. Marked functions that cannot be
/// targets are reported as UnsupportedConstruct diagnostics. Throws
/// Error(ParseFailure) naming the file and line.
InstrumentationPlan discover_targets(const std::filesystem::path& source_root,
                                     std::string_view annotation, Diagnostics& diagnostics);

/// A value-carrying `return` in a target's own body. Offsets index the
/// file text.
struct ReturnSite {
  std::size_t statement_offset = 0;  // the `return` keyword
  std::size_t statement_length = 0;  // through the terminating ';'
  std::size_t expr_offset = 0;
  std::size_t expr_length = 0;
  long line = 0;
  long column = 0;
  bool single_identifier = false;
};

/// Return statements with an expression, excluding those of lambdas and
/// local classes inside the body. Throws Error(UnsupportedConstruct) when a
/// return cannot be delimited.
std::vector<ReturnSite> find_return_sites(const SourceFile& file, const Target& target);

/// Rewrites the targets defined in one file. Everything outside target bodies
/// is left byte-identical apart from the marker header, and line numbers are
/// kept. A target whose return sites cannot all be rewritten is skipped with
/// an UnsupportedConstruct diagnostic. Throws Error(AlreadyInstrumented).
std::string instrument_source(const SourceFile& file, const std::vector<const Target*>& targets,
                              Diagnostics& diagnostics, std::vector<const Target*>* instrumented = nullptr);

struct InstrumentResult {
  InstrumentationPlan plan;
  std::vector<Target> instrumented;
};

/// Copies the tree to `out_dir` with target files rewritten. Throws
/// Error(AlreadyInstrumented) if any file in the tree carries the marker.
InstrumentResult instrument_tree(const std::filesystem::path& source_root, const std::filesystem::path& out_dir,
                                 std::string_view annotation, Diagnostics& diagnostics);

}  // namespace testgen
