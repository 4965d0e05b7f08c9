#include "testgen/model/value.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "testgen/model/errors.hpp"

namespace testgen {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::StoreClosed: return "StoreClosed";
    case ErrorCode::MissingRun: return "MissingRun";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::UnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorCode::AlreadyInstrumented: return "AlreadyInstrumented";
    case ErrorCode::UnresolvedPointer: return "UnresolvedPointer";
    case ErrorCode::DuplicateFullSerialization: return "DuplicateFullSerialization";
    case ErrorCode::IncompleteInvocation: return "IncompleteInvocation";
    case ErrorCode::UnsupportedType: return "UnsupportedType";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::CompileFailure: return "CompileFailure";
    case ErrorCode::EmptyBundle: return "EmptyBundle";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DriverFailure: return "DriverFailure";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
  }
  return "Unknown";
}

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Bool: return "bool";
    case PrimitiveKind::Int: return "int";
    case PrimitiveKind::Float: return "float";
    case PrimitiveKind::Char: return "char";
    case PrimitiveKind::String: return "string";
    case PrimitiveKind::Unit: return "unit";
  }
  return "unit";
}

std::optional<PrimitiveKind> primitive_kind_from_string(std::string_view text) {
  if (text == "bool") return PrimitiveKind::Bool;
  if (text == "int") return PrimitiveKind::Int;
  if (text == "float") return PrimitiveKind::Float;
  if (text == "char") return PrimitiveKind::Char;
  if (text == "string") return PrimitiveKind::String;
  if (text == "unit") return PrimitiveKind::Unit;
  return std::nullopt;
}

void ObjectValue::set_field(std::string name, ObservedValue value) {
  auto it = std::lower_bound(fields.begin(), fields.end(), name,
                             [](const Field& f, const std::string& n) { return f.name < n; });
  if (it != fields.end() && it->name == name) {
    it->value = std::move(value);
    return;
  }
  fields.insert(it, Field{std::move(name), std::move(value)});
}

const ObservedValue* ObjectValue::find_field(std::string_view name) const {
  auto it = std::lower_bound(fields.begin(), fields.end(), name,
                             [](const Field& f, std::string_view n) { return f.name < n; });
  if (it != fields.end() && it->name == name) return &it->value;
  return nullptr;
}

Primitive make_bool(bool v) { return {PrimitiveKind::Bool, v ? "true" : "false"}; }
Primitive make_int(std::int64_t v) { return {PrimitiveKind::Int, std::to_string(v)}; }
Primitive make_float(double v) { return {PrimitiveKind::Float, float_lexeme(v)}; }
Primitive make_char(char v) { return {PrimitiveKind::Char, std::string(1, v)}; }
Primitive make_string(std::string v) { return {PrimitiveKind::String, std::move(v)}; }
Primitive make_unit() { return {PrimitiveKind::Unit, "null"}; }

std::string float_lexeme(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int max_depth(const ObservedValue& v) {
  if (const auto* o = std::get_if<ObjectValue>(&v.node)) {
    int deepest = 0;
    for (const auto& f : o->fields) deepest = std::max(deepest, 1 + max_depth(f.value));
    return deepest;
  }
  if (const auto* s = std::get_if<Sequence>(&v.node)) {
    int deepest = 0;
    for (const auto& item : s->items) deepest = std::max(deepest, 1 + max_depth(item));
    return deepest;
  }
  return 0;
}

ObservedValue strip_ids(const ObservedValue& v) {
  if (const auto* o = std::get_if<ObjectValue>(&v.node)) {
    ObjectValue out;
    out.class_name = o->class_name;
    out.fields.reserve(o->fields.size());
    for (const auto& f : o->fields) out.fields.push_back({f.name, strip_ids(f.value)});
    return out;
  }
  if (const auto* s = std::get_if<Sequence>(&v.node)) {
    Sequence out;
    out.items.reserve(s->items.size());
    for (const auto& item : s->items) out.items.push_back(strip_ids(item));
    return out;
  }
  if (v.is<PointerRef>()) return PointerRef{};
  if (v.is<RecursionMarker>()) return RecursionMarker{};
  return v;
}

std::string_view to_string(ObsKind kind) {
  switch (kind) {
    case ObsKind::CurrentObjInst: return "CURRENT_OBJ_INST";
    case ObsKind::Parameter: return "PARAMETER";
    case ObsKind::Return: return "RETURN";
  }
  return "PARAMETER";
}

std::optional<ObsKind> obs_kind_from_string(std::string_view text) {
  if (text == "CURRENT_OBJ_INST") return ObsKind::CurrentObjInst;
  if (text == "PARAMETER") return ObsKind::Parameter;
  if (text == "RETURN") return ObsKind::Return;
  return std::nullopt;
}

std::string MethodId::key() const {
  return (container.empty() ? method_name : container + "::" + method_name) + signature;
}

namespace {

// Index of the ')' that closes the '(' at signature[0].
std::size_t closing_paren(const std::string& sig) {
  int depth = 0;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    char c = sig[i];
    if (c == '(' || c == '<' || c == '[') ++depth;
    if (c == ')' || c == '>' || c == ']') {
      --depth;
      if (depth == 0 && c == ')') return i;
    }
  }
  return std::string::npos;
}

}  // namespace

std::vector<std::string> MethodId::parameter_types() const {
  std::vector<std::string> out;
  std::size_t close = closing_paren(signature);
  if (signature.empty() || signature[0] != '(' || close == std::string::npos) return out;
  std::string current;
  int depth = 0;
  for (std::size_t i = 1; i < close; ++i) {
    char c = signature[i];
    if (c == '(' || c == '<' || c == '[') ++depth;
    if (c == ')' || c == '>' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(current);
      current.clear();
      continue;
    }
    current += c;
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

std::string MethodId::return_type() const {
  std::size_t close = closing_paren(signature);
  if (close == std::string::npos || signature.compare(close + 1, 2, "->") != 0) return "";
  return signature.substr(close + 3);
}

}  // namespace testgen
