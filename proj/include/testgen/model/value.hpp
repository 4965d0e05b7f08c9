#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace testgen {

enum class PrimitiveKind { Bool, Int, Float, Char, String, Unit };

std::string_view to_string(PrimitiveKind kind);
std::optional<PrimitiveKind> primitive_kind_from_string(std::string_view text);

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::Unit;
  std::string lexeme;

  friend bool operator==(const Primitive&, const Primitive&) = default;
};

struct Field;
struct ObservedValue;

/// A full serialization of one object. Fields are kept sorted by name and
/// names are unique; use set_field() to maintain that.
struct ObjectValue {
  std::string id;
  std::string class_name;
  std::vector<Field> fields;

  void set_field(std::string name, ObservedValue value);
  const ObservedValue* find_field(std::string_view name) const;

  friend bool operator==(const ObjectValue&, const ObjectValue&);
};

struct Sequence {
  std::vector<ObservedValue> items;

  friend bool operator==(const Sequence&, const Sequence&);
};

/// Stand-in for an object already fully serialized elsewhere in the session.
struct PointerRef {
  std::string id;

  friend bool operator==(const PointerRef&, const PointerRef&) = default;
};

/// Marks a revisit of an object already on the current root-to-node path.
struct RecursionMarker {
  std::string id;

  friend bool operator==(const RecursionMarker&, const RecursionMarker&) = default;
};

/// Explicit null for values that were not captured (beyond depth, or not
/// serializable).
struct DepthTruncated {
  friend bool operator==(const DepthTruncated&, const DepthTruncated&) = default;
};

struct ObservedValue {
  using Variant = std::variant<Primitive, ObjectValue, Sequence, PointerRef,
                               RecursionMarker, DepthTruncated>;
  Variant node;

  ObservedValue() : node(DepthTruncated{}) {}
  ObservedValue(Primitive p) : node(std::move(p)) {}
  ObservedValue(ObjectValue o) : node(std::move(o)) {}
  ObservedValue(Sequence s) : node(std::move(s)) {}
  ObservedValue(PointerRef p) : node(std::move(p)) {}
  ObservedValue(RecursionMarker r) : node(std::move(r)) {}
  ObservedValue(DepthTruncated d) : node(d) {}

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(node);
  }
  template <class T>
  T& as() {
    return std::get<T>(node);
  }

  friend bool operator==(const ObservedValue&, const ObservedValue&) = default;
};

struct Field {
  std::string name;
  ObservedValue value;

  friend bool operator==(const Field&, const Field&) = default;
};

inline bool operator==(const ObjectValue& a, const ObjectValue& b) {
  return a.id == b.id && a.class_name == b.class_name && a.fields == b.fields;
}
inline bool operator==(const Sequence& a, const Sequence& b) {
  return a.items == b.items;
}

// Convenience constructors used throughout the code base and its tests.
Primitive make_bool(bool v);
Primitive make_int(std::int64_t v);
Primitive make_float(double v);
Primitive make_char(char v);
Primitive make_string(std::string v);
Primitive make_unit();

/// Shortest decimal text that parses back to exactly `v`.
std::string float_lexeme(double v);

/// Depth of the deepest node, with the root at depth 0 and each object field
/// or sequence item one level below its container.
int max_depth(const ObservedValue& v);

/// Copy of `v` with every object id blanked; used to compare values whose ids
/// were assigned by different routes.
ObservedValue strip_ids(const ObservedValue& v);

enum class ObsKind { CurrentObjInst, Parameter, Return };

std::string_view to_string(ObsKind kind);
std::optional<ObsKind> obs_kind_from_string(std::string_view text);

/// Stable identity of a function under test.
struct MethodId {
  std::string file_path;   // relative to the source root
  std::string ns;          // enclosing namespace, "" for global
  std::string container;   // fully qualified class or namespace
  std::string method_name;
  std::string signature;   // canonical "(T1,T2)->R"
  bool is_void = false;
  bool has_receiver = false;

  /// container::method_name + signature, the grouping key.
  std::string key() const;
  std::vector<std::string> parameter_types() const;
  std::string return_type() const;

  friend bool operator==(const MethodId&, const MethodId&) = default;
};

struct ObservationRecord {
  std::string run_id;
  std::string obs_id;
  std::string invocation_id;
  MethodId method;
  ObsKind kind = ObsKind::Parameter;
  std::optional<int> param_index;
  long line = -1;
  long column = -1;
  ObservedValue value;
  std::uint64_t seq_nr = 0;

  friend bool operator==(const ObservationRecord&, const ObservationRecord&) = default;
};

}  // namespace testgen
