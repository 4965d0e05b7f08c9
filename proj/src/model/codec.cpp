#include "testgen/model/codec.hpp"

#include <algorithm>
#include <charconv>

#include "testgen/model/errors.hpp"

namespace testgen {

namespace {

constexpr std::string_view kPointerPrefix = "POINTS_TO_";

[[noreturn]] void malformed(const json::Node& at, const std::string& reason) {
  throw DocumentError(ErrorCode::MalformedDocument, at.offset, reason);
}

const std::string& member_string(const json::Node& n, std::string_view key) {
  const json::Node* m = n.find(key);
  if (!m) malformed(n, "missing member \"" + std::string(key) + "\"");
  if (!m->is(json::Node::Type::String)) malformed(*m, "member \"" + std::string(key) + "\" must be a string");
  return m->text;
}

long long member_int(const json::Node& n, std::string_view key) {
  const json::Node* m = n.find(key);
  if (!m) malformed(n, "missing member \"" + std::string(key) + "\"");
  if (!m->is(json::Node::Type::Number)) malformed(*m, "member \"" + std::string(key) + "\" must be a number");
  long long v = 0;
  auto res = std::from_chars(m->text.data(), m->text.data() + m->text.size(), v);
  if (res.ec != std::errc() || res.ptr != m->text.data() + m->text.size()) {
    malformed(*m, "member \"" + std::string(key) + "\" must be an integer");
  }
  return v;
}

bool member_bool(const json::Node& n, std::string_view key) {
  const json::Node* m = n.find(key);
  if (!m) malformed(n, "missing member \"" + std::string(key) + "\"");
  if (!m->is(json::Node::Type::Bool)) malformed(*m, "member \"" + std::string(key) + "\" must be a boolean");
  return m->boolean;
}

}  // namespace

json::Node value_to_node(const ObservedValue& v) {
  using json::Node;
  Node n = Node::object();
  std::visit(
      [&](const auto& alt) {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, Primitive>) {
          n.add("kind", Node::string("primitive"));
          n.add("type", Node::string(std::string(to_string(alt.kind))));
          n.add("value", Node::string(alt.lexeme));
        } else if constexpr (std::is_same_v<T, ObjectValue>) {
          n.add("class", Node::string(alt.class_name));
          Node fields = Node::object();
          std::vector<const Field*> sorted;
          sorted.reserve(alt.fields.size());
          for (const auto& f : alt.fields) sorted.push_back(&f);
          std::stable_sort(sorted.begin(), sorted.end(),
                           [](const Field* a, const Field* b) { return a->name < b->name; });
          for (const Field* f : sorted) fields.add(f->name, value_to_node(f->value));
          n.add("fields", std::move(fields));
          n.add("id", Node::string(alt.id));
          n.add("kind", Node::string("object"));
        } else if constexpr (std::is_same_v<T, Sequence>) {
          Node items = Node::array();
          for (const auto& item : alt.items) items.push(value_to_node(item));
          n.add("items", std::move(items));
          n.add("kind", Node::string("sequence"));
        } else if constexpr (std::is_same_v<T, PointerRef>) {
          n.add("kind", Node::string("pointer"));
          n.add("value", Node::string(std::string(kPointerPrefix) + alt.id));
        } else if constexpr (std::is_same_v<T, RecursionMarker>) {
          n.add("id", Node::string(alt.id));
          n.add("kind", Node::string("recursion"));
        } else {
          n.add("kind", Node::string("null"));
        }
      },
      v.node);
  return n;
}

ObservedValue value_from_node(const json::Node& n) {
  if (!n.is(json::Node::Type::Object)) malformed(n, "value must be an object");
  const json::Node* kind_node = n.find("kind");
  if (!kind_node || !kind_node->is(json::Node::Type::String)) malformed(n, "missing variant tag \"kind\"");
  const std::string& kind = kind_node->text;

  if (kind == "primitive") {
    const std::string& type = member_string(n, "type");
    auto pk = primitive_kind_from_string(type);
    if (!pk) throw DocumentError(ErrorCode::UnknownKind, n.find("type")->offset, "unknown primitive type \"" + type + "\"");
    return Primitive{*pk, member_string(n, "value")};
  }
  if (kind == "object") {
    ObjectValue o;
    o.id = member_string(n, "id");
    o.class_name = member_string(n, "class");
    const json::Node* fields = n.find("fields");
    if (!fields || !fields->is(json::Node::Type::Object)) malformed(n, "object needs a \"fields\" object");
    for (const auto& m : fields->members) {
      if (o.find_field(m.key)) malformed(m.value, "duplicate field \"" + m.key + "\"");
      o.set_field(m.key, value_from_node(m.value));
    }
    return o;
  }
  if (kind == "sequence") {
    const json::Node* items = n.find("items");
    if (!items || !items->is(json::Node::Type::Array)) malformed(n, "sequence needs an \"items\" array");
    Sequence s;
    s.items.reserve(items->items.size());
    for (const auto& item : items->items) s.items.push_back(value_from_node(item));
    return s;
  }
  if (kind == "pointer") {
    const std::string& text = member_string(n, "value");
    if (text.compare(0, kPointerPrefix.size(), kPointerPrefix) != 0) {
      malformed(*n.find("value"), "pointer value must start with POINTS_TO_");
    }
    return PointerRef{text.substr(kPointerPrefix.size())};
  }
  if (kind == "recursion") return RecursionMarker{member_string(n, "id")};
  if (kind == "null") return DepthTruncated{};
  throw DocumentError(ErrorCode::UnknownKind, kind_node->offset, "unknown variant tag \"" + kind + "\"");
}

std::string encode_value(const ObservedValue& v) { return json::write(value_to_node(v)); }

ObservedValue decode_value(std::string_view doc) { return value_from_node(json::parse(doc)); }

json::Node method_to_node(const MethodId& m) {
  using json::Node;
  Node n = Node::object();
  n.add("container", Node::string(m.container));
  n.add("file", Node::string(m.file_path));
  n.add("hasReceiver", Node::boolean_value(m.has_receiver));
  n.add("isVoid", Node::boolean_value(m.is_void));
  n.add("name", Node::string(m.method_name));
  n.add("namespace", Node::string(m.ns));
  n.add("signature", Node::string(m.signature));
  return n;
}

MethodId method_from_node(const json::Node& n) {
  if (!n.is(json::Node::Type::Object)) malformed(n, "method must be an object");
  MethodId m;
  m.container = member_string(n, "container");
  m.file_path = member_string(n, "file");
  m.has_receiver = member_bool(n, "hasReceiver");
  m.is_void = member_bool(n, "isVoid");
  m.method_name = member_string(n, "name");
  m.ns = member_string(n, "namespace");
  m.signature = member_string(n, "signature");
  return m;
}

std::string encode_record(const ObservationRecord& r) {
  using json::Node;
  Node n = Node::object();
  n.add("colNr", Node::number(static_cast<long long>(r.column)));
  n.add("invocation", Node::string(r.invocation_id));
  n.add("kind", Node::string(std::string(to_string(r.kind))));
  n.add("lNr", Node::number(static_cast<long long>(r.line)));
  n.add("method", method_to_node(r.method));
  n.add("obsId", Node::string(r.obs_id));
  if (r.param_index) n.add("paramIndex", Node::number(static_cast<long long>(*r.param_index)));
  n.add("runId", Node::string(r.run_id));
  n.add("seqNr", Node::number(std::to_string(r.seq_nr)));
  n.add("value", value_to_node(r.value));
  return json::write(n);
}

ObservationRecord decode_record(std::string_view line) {
  json::Node n = json::parse(line);
  if (!n.is(json::Node::Type::Object)) malformed(n, "record must be an object");
  ObservationRecord r;
  r.column = static_cast<long>(member_int(n, "colNr"));
  r.invocation_id = member_string(n, "invocation");
  const std::string& kind = member_string(n, "kind");
  auto k = obs_kind_from_string(kind);
  if (!k) throw DocumentError(ErrorCode::UnknownKind, n.find("kind")->offset, "unknown observation kind \"" + kind + "\"");
  r.kind = *k;
  r.line = static_cast<long>(member_int(n, "lNr"));
  const json::Node* method = n.find("method");
  if (!method) malformed(n, "missing member \"method\"");
  r.method = method_from_node(*method);
  r.obs_id = member_string(n, "obsId");
  if (n.find("paramIndex")) r.param_index = static_cast<int>(member_int(n, "paramIndex"));
  r.run_id = member_string(n, "runId");
  r.seq_nr = static_cast<std::uint64_t>(member_int(n, "seqNr"));
  const json::Node* value = n.find("value");
  if (!value) malformed(n, "missing member \"value\"");
  r.value = value_from_node(*value);
  if (r.kind == ObsKind::Parameter && (!r.param_index || *r.param_index < 0)) {
    malformed(n, "PARAMETER record needs a non-negative paramIndex");
  }
  return r;
}

std::string display_lexeme(const ObservedValue& v) {
  if (const auto* p = std::get_if<Primitive>(&v.node)) {
    if (p->kind == PrimitiveKind::String) return "\"" + json::escape(p->lexeme) + "\"";
    if (p->kind == PrimitiveKind::Char) return "'" + json::escape(p->lexeme) + "'";
    return p->lexeme;
  }
  if (const auto* o = std::get_if<ObjectValue>(&v.node)) return "<object " + o->class_name + ">";
  if (const auto* s = std::get_if<Sequence>(&v.node)) return "<sequence of " + std::to_string(s->items.size()) + ">";
  if (v.is<PointerRef>()) return "<pointer>";
  if (v.is<RecursionMarker>()) return "<recursion>";
  return "null";
}

}  // namespace testgen
