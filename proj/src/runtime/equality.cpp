#include "testgen/runtime/equality.hpp"

#include <algorithm>

#include "testgen/model/codec.hpp"
#include "testgen/model/errors.hpp"

namespace testgen {

std::string render_path(const std::vector<PathStep>& path) {
  std::string out;
  for (const auto& step : path) {
    if (step.index) {
      out += "[" + std::to_string(*step.index) + "]";
    } else {
      if (!out.empty()) out += '.';
      out += step.field;
    }
  }
  return out;
}

namespace {

bool wildcard(const ObservedValue& v) { return v.is<DepthTruncated>() || v.is<RecursionMarker>(); }

std::string describe_class(const ObservedValue& v) {
  if (const auto* o = std::get_if<ObjectValue>(&v.node)) return o->class_name;
  if (const auto* p = std::get_if<Primitive>(&v.node)) return std::string(to_string(p->kind));
  if (v.is<Sequence>()) return "sequence";
  return "value";
}

std::optional<FieldDiff> compare(const ObservedValue& e, const ObservedValue& a, std::vector<PathStep>& path,
                                 const std::string& owner) {
  if (wildcard(e) || wildcard(a)) return std::nullopt;
  const auto* eo = std::get_if<ObjectValue>(&e.node);
  const auto* ao = std::get_if<ObjectValue>(&a.node);
  if (eo && ao) {
    for (const auto& f : eo->fields) {
      const ObservedValue* other = ao->find_field(f.name);
      if (!other) continue;
      path.push_back(PathStep{f.name, std::nullopt});
      auto diff = compare(f.value, *other, path, eo->class_name);
      path.pop_back();
      if (diff) return diff;
    }
    return std::nullopt;
  }
  const auto* es = std::get_if<Sequence>(&e.node);
  const auto* as = std::get_if<Sequence>(&a.node);
  if (es && as) {
    std::size_t n = std::min(es->items.size(), as->items.size());
    for (std::size_t i = 0; i < n; ++i) {
      path.push_back(PathStep{{}, i});
      auto diff = compare(es->items[i], as->items[i], path, owner);
      path.pop_back();
      if (diff) return diff;
    }
    return std::nullopt;
  }
  const auto* ep = std::get_if<Primitive>(&e.node);
  const auto* ap = std::get_if<Primitive>(&a.node);
  if (ep && ap && ep->lexeme == ap->lexeme) return std::nullopt;
  const auto* er = std::get_if<PointerRef>(&e.node);
  const auto* ar = std::get_if<PointerRef>(&a.node);
  if (er && ar && er->id == ar->id) return std::nullopt;

  FieldDiff diff;
  diff.path = path;
  diff.field_path = path.empty() ? "<return value>" : render_path(path);
  diff.class_name = owner;
  diff.expected_lexeme = display_lexeme(e);
  diff.actual_lexeme = display_lexeme(a);
  return diff;
}

}  // namespace

EqualityVerdict assert_equal_common_fields(const ObservedValue& expected, const ObservedValue& actual) {
  std::vector<PathStep> path;
  EqualityVerdict verdict;
  verdict.first_diff = compare(expected, actual, path, describe_class(expected));
  verdict.passed = !verdict.first_diff.has_value();
  return verdict;
}

std::optional<std::size_t> locate(const json::Node& doc, const std::vector<PathStep>& path) {
  const json::Node* node = &doc;
  for (const auto& step : path) {
    if (step.index) {
      const json::Node* items = node->find("items");
      if (!items || *step.index >= items->items.size()) return std::nullopt;
      node = &items->items[*step.index];
    } else {
      const json::Node* fields = node->find("fields");
      if (!fields) return std::nullopt;
      node = fields->find(step.field);
      if (!node) return std::nullopt;
    }
  }
  if (const json::Node* value = node->find("value")) return value->offset;
  return node->offset;
}

std::string render_failure_message(const EqualityVerdict& verdict, const FailureContext& context) {
  if (verdict.passed || !verdict.first_diff) {
    throw Error(ErrorCode::PreconditionViolation, "no failure to render for a passing verdict");
  }
  const FieldDiff& d = *verdict.first_diff;
  std::string msg;
  msg += "This is an automatically generated unit test from testgen. ";
  msg += "testgen equality assertion failed! ";
  msg += "When comparing the return from the method under test with the expectation for the field `" + d.field_path +
         "` of the class `" + d.class_name + "` we saw the value `" + d.actual_lexeme +
         "` while we expected the value `" + d.expected_lexeme + "`. ";
  msg += "The expected return for this test is in the resource file `" + d.resource_path +
         "` at line: " + std::to_string(d.line) + " column: " + std::to_string(d.column) + ".\n";
  msg += "If the new behavior is intended, either:\n";
  msg += "  1. update the expected value in `" + d.resource_path + "`,\n";
  msg += "  2. regenerate this test: " + context.regen_command + "\n";
  msg += "  3. or delete test " + context.test_id + ".\n";
  if (!context.run_command.empty()) msg += "Re-run it with: " + context.run_command + "\n";
  return msg;
}

}  // namespace testgen
