#include <gtest/gtest.h>

#include <fstream>

#include "support/tempdir.hpp"
#include "testgen/gen/generator.hpp"
#include "testgen/model/errors.hpp"

using namespace testgen;
using tgtest::TempDir;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto at = s.find(needle); at != std::string::npos; at = s.find(needle, at + 1)) ++n;
  return n;
}

const char* kHeader = R"(#pragma once
#include <string>
#include <testgen/runtime/reflect.hpp>
namespace geo {
struct Point { int x = 0; int y = 0; };
class Grid {
 public:
  int cells() const;
  void clear();
 private:
  TESTGEN_FRIEND(geo::Grid)
  int w_ = 0;
};
double scale(int k, const Point& p);
}
TESTGEN_REFLECT(geo::Point, x, y)
TESTGEN_REFLECT(geo::Grid, w_)
)";

const char* kSource = R"(#include "geo.hpp"
namespace geo {
// @GenerateTestCases
int Grid::cells() const { return w_ * w_; }
// @GenerateTestCases
void Grid::clear() { w_ = 0; }
// @GenerateTestCases
double scale(int k, const Point& p) { return k * (p.x + p.y); }
}
// @GenerateTestCases
int answer() { return 42; }
)";

class GeneratorTest : public ::testing::Test {
 protected:
  void SetUp() override {
    write(dir_.path() / "geo.hpp", kHeader);
    write(dir_.path() / "geo.cpp", kSource);
    plan_ = discover_targets(dir_.path(), "GenerateTestCases", diag_);
    ctx_.plan = &plan_;
    ctx_.run_id = "run-1";
    ctx_.regen_command = "testgen carve";
  }

  MethodId method(const std::string& name) const {
    for (const auto& t : plan_.targets) {
      if (t.method.method_name == name) return t.method;
    }
    ADD_FAILURE() << "no target " << name;
    return {};
  }

  ObservationRecord record(const MethodId& m, ObsKind kind, std::optional<int> index, ObservedValue v,
                           const std::string& invocation, std::uint64_t seq) {
    ObservationRecord r;
    r.run_id = "run-1";
    r.obs_id = "o" + std::to_string(seq);
    r.invocation_id = invocation;
    r.method = m;
    r.kind = kind;
    r.param_index = index;
    r.value = std::move(v);
    r.seq_nr = seq;
    return r;
  }

  static ObservedValue point(int x, int y) {
    ObjectValue o;
    o.id = "p" + std::to_string(x) + "_" + std::to_string(y);
    o.class_name = "geo::Point";
    o.set_field("x", make_int(x));
    o.set_field("y", make_int(y));
    return o;
  }

  static std::vector<ResolvedObservation> resolved(std::vector<ObservationRecord> records) {
    std::vector<ResolvedObservation> out;
    for (auto& r : records) out.push_back(ResolvedObservation{std::move(r)});
    return out;
  }

  TempDir dir_;
  Diagnostics diag_;
  InstrumentationPlan plan_;
  GeneratorContext ctx_;
};

}  // namespace

TEST_F(GeneratorTest, CompleteInvocationsAreGroupedInFirstRecordOrder) {
  MethodId scale = method("scale");
  auto groups = group_invocations(resolved({
      record(scale, ObsKind::Parameter, 1, point(1, 2), "b", 5),
      record(scale, ObsKind::Parameter, 0, make_int(3), "a", 1),
      record(scale, ObsKind::Parameter, 0, make_int(2), "b", 2),
      record(scale, ObsKind::Parameter, 1, point(1, 1), "a", 3),
      record(scale, ObsKind::Return, std::nullopt, make_float(6.0), "a", 4),
      record(scale, ObsKind::Return, std::nullopt, make_float(6.0), "b", 6),
  }));
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].invocation_id, "a");
  EXPECT_EQ(groups[1].invocation_id, "b");
  ASSERT_EQ(groups[1].params.size(), 2u);
  EXPECT_EQ(groups[1].params[0].param_index, 0);
  EXPECT_EQ(groups[1].params[1].param_index, 1);
}

TEST_F(GeneratorTest, GapsAndDuplicatesAreIncomplete) {
  MethodId scale = method("scale");
  MethodId cells = method("cells");
  Diagnostics d;
  auto groups = group_invocations(resolved({
                                      record(scale, ObsKind::Parameter, 0, make_int(3), "gap", 1),
                                      record(scale, ObsKind::Return, std::nullopt, make_float(1), "gap", 2),
                                      record(scale, ObsKind::Parameter, 0, make_int(3), "dup", 3),
                                      record(scale, ObsKind::Parameter, 0, make_int(4), "dup", 4),
                                      record(scale, ObsKind::Parameter, 1, point(0, 0), "dup", 5),
                                      record(scale, ObsKind::Return, std::nullopt, make_float(0), "dup", 6),
                                      record(cells, ObsKind::Return, std::nullopt, make_int(4), "norecv", 7),
                                  }),
                                  &d);
  EXPECT_TRUE(groups.empty());
  EXPECT_EQ(d.count("IncompleteInvocation"), 3u);
}

TEST_F(GeneratorTest, NonVoidTwoParameterTestHasThreeLoadsAndOneAssert) {
  MethodId scale = method("scale");
  auto groups = group_invocations(resolved({
      record(scale, ObsKind::Parameter, 0, make_int(3), "a", 1),
      record(scale, ObsKind::Parameter, 1, point(1, 1), "a", 2),
      record(scale, ObsKind::Return, std::nullopt, make_float(6.0), "a", 3),
  }));
  ASSERT_EQ(groups.size(), 1u);
  TestCase tc = generate_test(groups[0], ctx_);
  EXPECT_EQ(tc.resources.size(), 3u);
  EXPECT_EQ(count(tc.source_text, "initialize_observation("), 2u);
  EXPECT_EQ(count(tc.source_text, "assert_equal("), 1u);
  EXPECT_NE(tc.source_text.find("#include \"geo.hpp\""), std::string::npos);
  EXPECT_NE(tc.source_text.find("namespace geo {"), std::string::npos);
  EXPECT_NE(tc.source_text.find("killswitched()"), std::string::npos);
  EXPECT_EQ(tc.source_path, "tests/geo/scale_" + tc.test_id + ".cpp");
  EXPECT_EQ(tc.observed_types, (std::set<std::string>{"geo::Point"}));
  ASSERT_TRUE(tc.return_resource.has_value());
  EXPECT_EQ(*tc.return_resource, "resources/o3.obs");
}

TEST_F(GeneratorTest, ReceiverAndVoidShapes) {
  MethodId cells = method("cells");
  MethodId clear = method("clear");
  MethodId answer = method("answer");
  ObjectValue grid;
  grid.id = "g";
  grid.class_name = "geo::Grid";
  grid.set_field("w_", make_int(3));
  auto groups = group_invocations(resolved({
      record(cells, ObsKind::CurrentObjInst, std::nullopt, grid, "c", 1),
      record(cells, ObsKind::Return, std::nullopt, make_int(9), "c", 2),
      record(clear, ObsKind::CurrentObjInst, std::nullopt, grid, "v", 3),
      record(answer, ObsKind::Return, std::nullopt, make_int(42), "z", 4),
  }));
  ASSERT_EQ(groups.size(), 3u);
  TestCase with_receiver = generate_test(groups[0], ctx_);
  EXPECT_NE(with_receiver.source_text.find("::geo::Grid receiver{};"), std::string::npos);
  EXPECT_EQ(count(with_receiver.source_text, "initialize_observation("), 1u);
  EXPECT_EQ(count(with_receiver.source_text, "assert_equal("), 1u);

  TestCase void_call = generate_test(groups[1], ctx_);
  EXPECT_EQ(count(void_call.source_text, "assert_equal("), 0u);
  EXPECT_FALSE(void_call.return_resource.has_value());

  TestCase free_fn = generate_test(groups[2], ctx_);
  EXPECT_EQ(count(free_fn.source_text, "initialize_observation("), 0u);
  EXPECT_NE(free_fn.source_text.find("int answer();"), std::string::npos);
  EXPECT_NE(free_fn.source_text.find("::answer()"), std::string::npos);
  EXPECT_EQ(free_fn.source_path.rfind("tests/global/", 0), 0u);
}

TEST_F(GeneratorTest, UnregisteredObservedClassIsUnsupported) {
  MethodId scale = method("scale");
  ObjectValue stranger;
  stranger.id = "s";
  stranger.class_name = "geo::Stranger";
  auto groups = group_invocations(resolved({
      record(scale, ObsKind::Parameter, 0, make_int(1), "a", 1),
      record(scale, ObsKind::Parameter, 1, stranger, "a", 2),
      record(scale, ObsKind::Return, std::nullopt, make_float(0), "a", 3),
  }));
  ASSERT_EQ(groups.size(), 1u);
  try {
    generate_test(groups[0], ctx_);
    FAIL() << "expected UnsupportedType";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedType);
    EXPECT_NE(std::string(e.what()).find("geo::Stranger"), std::string::npos);
  }
}

TEST_F(GeneratorTest, IdenticalInvocationsAreDeduplicatedAndIdsAreStable) {
  MethodId scale = method("scale");
  std::vector<ObservationRecord> records;
  for (int i = 0; i < 3; ++i) {
    std::string inv = "i" + std::to_string(i);
    std::uint64_t base = 10 * i;
    records.push_back(record(scale, ObsKind::Parameter, 0, make_int(i == 2 ? 7 : 3), inv, base + 1));
    records.push_back(record(scale, ObsKind::Parameter, 1, point(1, 1), inv, base + 2));
    records.push_back(record(scale, ObsKind::Return, std::nullopt, make_float(6.0), inv, base + 3));
  }
  auto groups = group_invocations(resolved(records));
  std::size_t dups = 0;
  auto tests = generate_tests(groups, ctx_, nullptr, &dups);
  EXPECT_EQ(tests.size(), 2u);
  EXPECT_EQ(dups, 1u);
  auto again = generate_tests(groups, ctx_);
  ASSERT_EQ(again.size(), 2u);
  EXPECT_EQ(again[0].test_id, tests[0].test_id);
  EXPECT_EQ(again[0].source_text, tests[0].source_text);
  EXPECT_NE(tests[0].test_id, tests[1].test_id);
}

TEST(Sanitize, IdentifierSafe) {
  EXPECT_EQ(sanitize_identifier("geo::Grid<int>"), "geo__Grid_int_");
  EXPECT_EQ(normalize_type_name(" ::geo :: Point "), "geo::Point");
}
