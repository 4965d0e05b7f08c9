#pragma once

// The stages behind the command line: instrument, run a driver, carve.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "testgen/gen/generator.hpp"
#include "testgen/instrument/instrumenter.hpp"
#include "testgen/model/diagnostics.hpp"
#include "testgen/publish/builder.hpp"
#include "testgen/publish/publisher.hpp"

namespace testgen {

struct PipelineConfig {
  std::filesystem::path source_root;
  std::string annotation{kDefaultAnnotation};
  std::filesystem::path store;
  int max_depth = 5;
  std::filesystem::path out;
  std::string driver;
  bool keep_flaky_report = false;
  std::vector<std::filesystem::path> include_dirs;
  /// Instrumented copy of the tree used by `run` (the driver's working directory).
  std::filesystem::path instrumented_dir;
  /// Scratch space for builds; a fresh temporary directory when empty.
  std::filesystem::path work_dir;
  bool keep_work = false;
  Toolchain toolchain = Toolchain::detect();
};

/// "<UTC timestamp>-<random suffix>".
std::string new_run_id();

/// Rewrites the tree into `out`. Throws Error(PreconditionViolation) when
/// nothing could be instrumented.
InstrumentResult cmd_instrument(const PipelineConfig& config, const std::filesystem::path& out, Diagnostics& diagnostics);

/// Runs the driver (cwd = instrumented_dir when set) with TESTGEN_STORE,
/// TESTGEN_RUN_ID and TESTGEN_MAX_DEPTH set, plus TESTGEN_CXX,
/// TESTGEN_INCLUDE_DIR and TESTGEN_RUNTIME_LIB for building the program.
/// Returns the run id; throws Error(DriverFailure) on a nonzero exit (the
/// store is kept).
std::string cmd_run(const PipelineConfig& config, Diagnostics& diagnostics, std::string run_id = {},
                    std::string* driver_output = nullptr);

struct CarveOutcome {
  PublishReport report;
  bool published = false;
  std::vector<TestCase> tests;  // every generated test, before the gate
};

/// read -> resolve -> group -> generate -> gate -> select -> publish.
CarveOutcome cmd_carve(const PipelineConfig& config, const std::string& run_id, Diagnostics& diagnostics);

}  // namespace testgen
