#pragma once

// Dependency manifest, 5-run flake gate, greedy coverage selection and the
// bundle writer.

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "testgen/gen/generator.hpp"
#include "testgen/instrument/instrumenter.hpp"
#include "testgen/model/diagnostics.hpp"

namespace testgen {

inline constexpr int kFlakeRuns = 5;

/// Dependency identifiers are paths relative to the source root, plus
/// "lib:app" for the program's non-main translation units.
struct TypeIndex {
  std::map<std::string, std::set<std::string>> providers;  // normalized type -> deps
  std::map<std::string, std::set<std::string>> units;      // file -> its own deps
};

/// Every registered type maps to its registering file and that file's local
/// include closure; every file maps to itself, its include closure and
/// "lib:app".
TypeIndex build_type_index(const InstrumentationPlan& plan);

struct DependencyResult {
  std::set<std::string> dependencies;
  std::vector<std::string> unknown_types;
  bool flagged() const { return !unknown_types.empty(); }
};

/// deps(unit under test) plus the providers of every observed type. Types
/// missing from the index are reported as UnknownType and left out.
DependencyResult compute_dependencies(const TestCase& test, const TypeIndex& index, Diagnostics* diagnostics = nullptr);

struct ManifestEntry {
  std::string test_id;
  std::string source_path;
  std::string method;
  std::set<std::string> dependencies;
  std::set<std::string> resources;
  bool flagged = false;
};

struct Manifest {
  std::vector<ManifestEntry> tests;
};

std::string manifest_json(const Manifest& manifest);

enum class Verdict { StablePass, Flaky, Broken };
std::string_view to_string(Verdict v);

struct FlakeReport {
  std::string test_id;
  std::vector<bool> runs;
  Verdict verdict = Verdict::Broken;
  std::string detail;  // output of the first failing run, or the compile log
};

Verdict classify(const std::vector<bool>& runs);

/// Runs one isolated execution; true when it passed.
using TestRunner = std::function<bool(int run_index)>;

/// Exactly kFlakeRuns sequential runs.
FlakeReport flake_gate(const std::string& test_id, const TestRunner& runner);

struct PoolEntry {
  std::string test_id;
  std::set<std::string> coverage;
};

/// Greedy max-marginal-coverage order. Ties go to the larger total coverage,
/// then the smaller test id. Stops once nothing adds coverage.
std::vector<std::string> select_tests(const std::vector<PoolEntry>& pool);

struct PublishReport {
  std::size_t observations = 0;
  std::size_t dropped_observations = 0;
  std::size_t invocations = 0;
  std::size_t generated = 0;
  std::size_t deduped = 0;
  std::size_t unsupported = 0;
  std::size_t broken = 0;
  std::size_t flaky = 0;
  std::size_t stable = 0;
  std::size_t selected = 0;
  std::size_t covered_items = 0;
  std::vector<FlakeReport> flake_reports;
  std::vector<std::string> selected_ids;

  std::string json() const;
  std::string text() const;
};

struct BundleInputs {
  std::vector<const TestCase*> suite;  // in selection order
  Manifest manifest;
  PublishReport report;
  bool keep_flaky_report = false;
  /// Build description written as CMakeLists.txt ("" to skip).
  std::string cmake_lists;
};

/// Writes the bundle to a sibling temporary directory, then swaps it into
/// place so no file from an earlier bundle survives. Throws
/// Error(EmptyBundle) for an empty suite and Error(IoFailure).
void publish(const BundleInputs& inputs, const std::filesystem::path& out_dir);

}  // namespace testgen
