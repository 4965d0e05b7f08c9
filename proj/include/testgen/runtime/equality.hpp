#pragma once

// Common-fields equality between an expected observation and the snapshot of
// an actual value, and the failure message shown by generated tests.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "testgen/model/json_text.hpp"
#include "testgen/model/value.hpp"

namespace testgen {

struct PathStep {
  std::string field;                 // set for object fields
  std::optional<std::size_t> index;  // set for sequence items
};

std::string render_path(const std::vector<PathStep>& path);

struct FieldDiff {
  std::vector<PathStep> path;
  std::string field_path;
  std::string class_name;
  std::string expected_lexeme;
  std::string actual_lexeme;
  std::string resource_path;
  long line = -1;
  long column = -1;
};

struct EqualityVerdict {
  bool passed = true;
  std::optional<FieldDiff> first_diff;
};

/// Compares only what both sides have: fields present in both objects,
/// sequence items up to the shorter length. DepthTruncated and
/// RecursionMarker on either side match anything. Stops at the first
/// mismatch, visiting fields in name order.
EqualityVerdict assert_equal_common_fields(const ObservedValue& expected, const ObservedValue& actual);

/// Byte offset, within the encoded expected document, of the node at `path`
/// (the "value" member for primitives).
std::optional<std::size_t> locate(const json::Node& doc, const std::vector<PathStep>& path);

struct FailureContext {
  std::string test_id;
  std::string regen_command;
  std::string run_command;
};

/// Human-readable failure text. Throws Error(PreconditionViolation) for a
/// passing verdict.
std::string render_failure_message(const EqualityVerdict& verdict, const FailureContext& context);

}  // namespace testgen
