#pragma once

// Turns resolved observations into test sources plus their resource files.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "testgen/instrument/instrumenter.hpp"
#include "testgen/model/diagnostics.hpp"
#include "testgen/model/value.hpp"
#include "testgen/resolve/resolver.hpp"

namespace testgen {

/// All records of one dynamic call of a target.
struct InvocationGroup {
  MethodId method;
  std::string invocation_id;
  std::optional<ObservationRecord> receiver;
  std::vector<ObservationRecord> params;  // by index
  std::optional<ObservationRecord> ret;
  std::uint64_t first_seq = 0;
};

/// Groups by invocation id, in order of each group's first record. Groups
/// missing a receiver, a parameter index, or the return of a non-void call,
/// or holding duplicates, are dropped as IncompleteInvocation.
std::vector<InvocationGroup> group_invocations(const std::vector<ResolvedObservation>& resolved,
                                               Diagnostics* diagnostics = nullptr);

struct ResourceFile {
  std::string rel_path;  // "resources/<obsId>.obs"
  std::string content;
};

struct TestCase {
  std::string test_id;
  MethodId method;
  std::optional<std::string> receiver_resource;
  std::vector<std::string> param_resources;
  std::optional<std::string> return_resource;
  std::string source_path;  // "tests/<container>/<method>_<testId>.cpp"
  std::string source_text;
  std::string regen_command;
  std::string run_command;
  std::vector<ResourceFile> resources;
  std::string content_hash;
  std::string target_file;               // file defining the method under test
  std::vector<std::string> includes;     // relative to the source root
  std::set<std::string> observed_types;  // classes appearing in any resource
};

struct GeneratorContext {
  const InstrumentationPlan* plan = nullptr;
  std::string run_id;
  int max_depth = 5;
  std::string regen_command;
};

/// Throws Error(UnsupportedType) when the receiver or an observed class has
/// no registration, or a parameter was not serializable.
TestCase generate_test(const InvocationGroup& group, const GeneratorContext& context);

/// generate_test over every group, skipping failures (diagnosed) and groups
/// whose resources duplicate an earlier test's.
std::vector<TestCase> generate_tests(const std::vector<InvocationGroup>& groups, const GeneratorContext& context,
                                     Diagnostics* diagnostics = nullptr, std::size_t* deduplicated = nullptr);

/// Identifier-safe form of any text.
std::string sanitize_identifier(const std::string& text);

/// Leading "::" and all whitespace removed.
std::string normalize_type_name(const std::string& name);

}  // namespace testgen
