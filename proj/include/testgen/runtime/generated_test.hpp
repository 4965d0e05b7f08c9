#pragma once

// Support code included by every generated test.
//
//   TESTGEN_KILLSWITCH=1     every generated test returns before doing anything
//   TESTGEN_UPDATE=1         a failing assertion rewrites the expected resource
//   TESTGEN_RESOURCE_ROOT    directory the "resources/..." paths are relative to
//   TESTGEN_REMEDIATION_DIR  a failing assertion also writes <testId>.json there
//                            with the update, regenerate and delete commands

#include <functional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "testgen/model/value.hpp"
#include "testgen/runtime/equality.hpp"
#include "testgen/runtime/reflect.hpp"
#include "testgen/runtime/serializer.hpp"

namespace testgen::gen {

struct TestInfo {
  const char* test_id;
  const char* regen_command;
  const char* run_command;
  const char* source_path;
};

struct Resource {
  std::string rel_path;
  std::string full_path;
  int max_depth = kDefaultMaxDepth;
  int header_lines = 0;
  std::string document;  // the text after the header
  ObservedValue value;
};

class AssertionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool killswitched();

/// Reads "<root>/<rel_path>"; throws Error(IoFailure) or DocumentError.
Resource load_resource(const std::string& rel_path);

/// Header line plus indented document, as written next to generated tests.
std::string resource_text(const ObservedValue& v, int max_depth);

template <class T>
void initialize_observation(T& out, const std::string& rel_path) {
  Resource r = load_resource(rel_path);
  ReconstructionContext ctx;
  assign_from(out, r.value, ctx);
}

/// Compares the snapshot of `actual` with the expected resource on common
/// fields; throws AssertionFailure with the maintenance message on mismatch.
void assert_equal_snapshot(const std::string& expected_rel_path, const ObservedValue& actual, const TestInfo& info);

template <class T>
void assert_equal(const std::string& expected_rel_path, const T& actual, const TestInfo& info) {
  int depth = load_resource(expected_rel_path).max_depth;
  assert_equal_snapshot(expected_rel_path, snapshot(make_handle(actual), depth), info);
}

struct RegisteredTest {
  std::string name;
  std::function<void()> body;
};

std::vector<RegisteredTest>& registry();

struct Registrar {
  Registrar(std::string name, std::function<void()> body) {
    registry().push_back(RegisteredTest{std::move(name), std::move(body)});
  }
};

/// Runs every registered test, or only the one named by `--only NAME`;
/// `--list` prints the names. Returns the process exit code.
int run_registered(int argc, char** argv);

}  // namespace testgen::gen

#define TESTGEN_TEST(name)                                                        \
  static void name();                                                             \
  static const ::testgen::gen::Registrar name##_registrar{#name, &name};          \
  static void name()
