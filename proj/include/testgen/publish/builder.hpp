#pragma once

// Compiles the program under test (with coverage counters) and individual
// generated tests, and reads line coverage back with gcov.

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "testgen/gen/generator.hpp"
#include "testgen/instrument/instrumenter.hpp"
#include "testgen/publish/process.hpp"

namespace testgen {

struct Toolchain {
  std::string cxx;
  std::filesystem::path testgen_include;
  std::filesystem::path runtime_lib;
  std::filesystem::path test_main_lib;
  std::vector<std::string> flags{"-std=c++20", "-O0"};

  /// Paths recorded at build time; TESTGEN_CXX, TESTGEN_INCLUDE_DIR,
  /// TESTGEN_RUNTIME_LIB and TESTGEN_TEST_MAIN_LIB override them.
  static Toolchain detect();
};

/// Compiles and links `sources` into `exe` with the runtime library.
ProcessResult build_program(const Toolchain& toolchain, const std::vector<std::filesystem::path>& sources,
                            const std::vector<std::filesystem::path>& include_dirs, const std::filesystem::path& exe);

/// Non-header files of the plan that do not define main, relative to the root.
std::vector<std::string> library_sources(const InstrumentationPlan& plan);

class Builder {
 public:
  Builder(Toolchain toolchain, std::filesystem::path work_dir, std::filesystem::path source_root,
          std::vector<std::filesystem::path> include_dirs);

  /// Throws Error(CompileFailure) carrying the compiler output.
  void build_app(const InstrumentationPlan& plan);

  /// Compiles `<stage_dir>/<test.source_path>` and links it against the app.
  /// Throws Error(CompileFailure).
  std::filesystem::path build_test(const TestCase& test, const std::filesystem::path& stage_dir);

  /// Compiles every test into one translation unit and one executable; a
  /// single test runs with `--only testgen_<id>`. Throws Error(CompileFailure)
  /// when any of them does not build.
  std::filesystem::path build_suite(const std::vector<TestCase>& tests, const std::filesystem::path& stage_dir);

  /// Removes all coverage counters written so far.
  void reset_coverage() const;

  /// "file:line" for every executed line of `files` (relative to the root).
  std::set<std::string> collect_coverage(const std::set<std::string>& files) const;

  const Toolchain& toolchain() const { return toolchain_; }
  const std::vector<std::filesystem::path>& include_dirs() const { return include_dirs_; }

 private:
  std::vector<std::string> compile_flags() const;

  Toolchain toolchain_;
  std::filesystem::path work_dir_;
  std::filesystem::path source_root_;
  std::vector<std::filesystem::path> include_dirs_;
  std::vector<std::filesystem::path> app_objects_;
  std::vector<std::filesystem::path> test_objects_;
};

/// CMakeLists.txt for a published bundle: one executable and one ctest
/// entry per test, all linked against the program's library sources.
std::string bundle_cmake(const Toolchain& toolchain, const InstrumentationPlan& plan,
                         const std::vector<std::filesystem::path>& include_dirs,
                         const std::vector<const TestCase*>& suite);

}  // namespace testgen
