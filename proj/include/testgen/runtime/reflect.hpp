#pragma once

// Opt-in field reflection for live objects.
//
// A type becomes serializable as an object by registering its fields at
// global scope:
//
//   TESTGEN_REFLECT(shop::Cart, items_, owner_)
//
// Private members need `TESTGEN_FRIEND(shop::Cart)` inside the class body.
// Arithmetic types, enums, std::string, sequence containers, std::map, pairs,
// optionals and smart/raw pointers are handled without registration. Anything
// else is reported as unsupported and serializes as a null stand-in.

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <typeindex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "testgen/model/value.hpp"

namespace testgen {

template <class T>
struct Reflect;

template <class T>
concept Reflected = requires { Reflect<T>::name; };

enum class HandleKind { Primitive, Object, Sequence, Pointer, Unsupported };

struct TypeOps;

/// Type-erased, non-owning view of a live value.
struct Handle {
  const void* ptr = nullptr;
  const TypeOps* ops = nullptr;

  explicit operator bool() const { return ptr != nullptr && ops != nullptr; }
};

class FieldSink {
 public:
  virtual void field(std::string_view name, Handle child) = 0;

 protected:
  ~FieldSink() = default;
};

class ItemSink {
 public:
  virtual void item(Handle child) = 0;

 protected:
  ~ItemSink() = default;
};

struct TypeOps {
  HandleKind kind;
  std::string_view type_name;
  Primitive (*primitive)(const void*);
  void (*fields)(const void*, FieldSink&);
  void (*items)(const void*, ItemSink&);
  Handle (*deref)(const void*);
};

/// Registered class name with any leading "::" and whitespace removed.
std::string normalize_class_name(std::string_view raw);

namespace detail {

template <class T>
struct is_std_pair : std::false_type {};
template <class A, class B>
struct is_std_pair<std::pair<A, B>> : std::true_type {};

template <class T>
struct pointee {
  using type = void;
};
template <class T>
struct pointee<T*> {
  using type = T;
};
template <class T>
struct pointee<std::shared_ptr<T>> {
  using type = T;
};
template <class T, class D>
struct pointee<std::unique_ptr<T, D>> {
  using type = T;
};
template <class T>
struct pointee<std::optional<T>> {
  using type = T;
};

template <class T>
constexpr bool is_pointer_like_v = !std::is_void_v<typename pointee<T>::type> &&
                                   !std::is_function_v<typename pointee<T>::type>;

template <class T>
concept Iterable = requires(const T& t) {
  t.begin();
  t.end();
  typename T::value_type;
};

template <class T>
constexpr bool is_primitive_v = std::is_arithmetic_v<T> || std::is_enum_v<T> ||
                                std::is_same_v<T, std::string>;

template <class T>
Primitive primitive_of(const void* p) {
  const T& v = *static_cast<const T*>(p);
  if constexpr (std::is_same_v<T, bool>) {
    return make_bool(v);
  } else if constexpr (std::is_same_v<T, char>) {
    return make_char(v);
  } else if constexpr (std::is_enum_v<T>) {
    return make_int(static_cast<std::int64_t>(v));
  } else if constexpr (std::is_floating_point_v<T>) {
    return make_float(static_cast<double>(v));
  } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
    return Primitive{PrimitiveKind::Int, std::to_string(static_cast<unsigned long long>(v))};
  } else if constexpr (std::is_integral_v<T>) {
    return make_int(static_cast<std::int64_t>(v));
  } else {
    return make_string(v);
  }
}

template <class T>
const TypeOps* ops_for();

template <class T>
Handle handle_of(const T& v) {
  return Handle{&v, ops_for<T>()};
}

template <class T>
void fields_of(const void* p, FieldSink& sink) {
  const T& self = *static_cast<const T*>(p);
  Reflect<T>::visit(self, [&sink](std::string_view name, const auto& member) {
    sink.field(name, handle_of(member));
  });
}

template <class T>
void items_of(const void* p, ItemSink& sink) {
  const T& self = *static_cast<const T*>(p);
  if constexpr (is_std_pair<T>::value) {
    sink.item(handle_of(self.first));
    sink.item(handle_of(self.second));
  } else {
    for (const auto& item : self) sink.item(handle_of(item));
  }
}

template <class T>
Handle deref_of(const void* p) {
  const T& self = *static_cast<const T*>(p);
  if constexpr (std::is_pointer_v<T>) {
    if (self == nullptr) return {};
    return handle_of(*self);
  } else {
    if (!self) return {};
    return handle_of(*self);
  }
}

template <class T>
std::string_view raw_type_name() {
  if constexpr (Reflected<T>) {
    return Reflect<T>::name;
  } else {
    // __PRETTY_FUNCTION__ carries "T = <type>"; good enough for diagnostics.
    std::string_view pretty = __PRETTY_FUNCTION__;
    auto start = pretty.find("T = ");
    if (start == std::string_view::npos) return "unknown";
    start += 4;
    auto end = pretty.find_first_of(";]", start);
    return pretty.substr(start, end - start);
  }
}

template <class T>
const TypeOps* ops_for() {
  using U = std::remove_cv_t<T>;
  static const TypeOps ops = [] {
    TypeOps o{HandleKind::Unsupported, raw_type_name<U>(), nullptr, nullptr, nullptr, nullptr};
    if constexpr (is_primitive_v<U>) {
      o.kind = HandleKind::Primitive;
      o.primitive = &primitive_of<U>;
    } else if constexpr (Reflected<U>) {
      o.kind = HandleKind::Object;
      o.fields = &fields_of<U>;
    } else if constexpr (is_pointer_like_v<U>) {
      using P = std::remove_cv_t<typename pointee<U>::type>;
      // char* is a C string rather than a pointer to one char.
      if constexpr (!std::is_same_v<P, char>) {
        o.kind = HandleKind::Pointer;
        o.deref = &deref_of<U>;
      }
    } else if constexpr (is_std_pair<U>::value || Iterable<U>) {
      o.kind = HandleKind::Sequence;
      o.items = &items_of<U>;
    }
    return o;
  }();
  return &ops;
}

}  // namespace detail

template <class T>
Handle make_handle(const T& v) {
  return detail::handle_of(v);
}

// ---------------------------------------------------------------------------
// Reconstruction of live values from (resolved) observations.

/// Tracks objects built during one reconstruction so that recursion markers
/// can be tied back to the already-built instance.
class ReconstructionContext {
 public:
  template <class T>
  void remember(const std::string& id, const std::shared_ptr<T>& p) {
    if (!id.empty()) built_.insert_or_assign(id, std::make_pair(std::type_index(typeid(T)), std::shared_ptr<void>(p)));
  }

  template <class T>
  std::shared_ptr<T> recall(const std::string& id) const {
    auto it = built_.find(id);
    if (it == built_.end() || it->second.first != std::type_index(typeid(T))) return nullptr;
    return std::static_pointer_cast<T>(it->second.second);
  }

  /// Raw-pointer targets are owned here for the rest of the process.
  static void keep_alive(std::shared_ptr<void> p);

 private:
  std::unordered_map<std::string, std::pair<std::type_index, std::shared_ptr<void>>> built_;
};

template <class T>
void assign_from(T& out, const ObservedValue& v, ReconstructionContext& ctx);

namespace detail {

template <class T>
void assign_primitive(T& out, const Primitive& p) {
  const std::string& s = p.lexeme;
  if constexpr (std::is_same_v<T, bool>) {
    out = (s == "true");
  } else if constexpr (std::is_same_v<T, char>) {
    out = s.empty() ? '\0' : s[0];
  } else if constexpr (std::is_enum_v<T>) {
    long long raw = 0;
    std::from_chars(s.data(), s.data() + s.size(), raw);
    out = static_cast<T>(raw);
  } else if constexpr (std::is_floating_point_v<T>) {
    if (s == "nan") {
      out = std::numeric_limits<T>::quiet_NaN();
    } else if (s == "inf") {
      out = std::numeric_limits<T>::infinity();
    } else if (s == "-inf") {
      out = -std::numeric_limits<T>::infinity();
    } else {
      out = static_cast<T>(std::strtod(s.c_str(), nullptr));
    }
  } else if constexpr (std::is_integral_v<T>) {
    T raw{};
    std::from_chars(s.data(), s.data() + s.size(), raw);
    out = raw;
  } else {
    out = s;
  }
}

template <class T>
void assign_pointer(T& out, const ObservedValue& v, ReconstructionContext& ctx) {
  using P = std::remove_cv_t<typename pointee<T>::type>;
  if (v.is<DepthTruncated>()) {
    out = T{};
    return;
  }
  if (const auto* p = std::get_if<Primitive>(&v.node); p && p->kind == PrimitiveKind::Unit) {
    out = T{};
    return;
  }
  if constexpr (std::is_same_v<T, std::optional<P>>) {
    P inner{};
    assign_from(inner, v, ctx);
    out = std::move(inner);
  } else if constexpr (std::is_same_v<T, std::unique_ptr<P>>) {
    auto inner = std::make_unique<P>();
    assign_from(*inner, v, ctx);
    out = std::move(inner);
  } else {
    std::shared_ptr<P> sp;
    if (const auto* r = std::get_if<RecursionMarker>(&v.node)) {
      sp = ctx.recall<P>(r->id);
    } else {
      sp = std::make_shared<P>();
      if (const auto* o = std::get_if<ObjectValue>(&v.node)) ctx.remember(o->id, sp);
      assign_from(*sp, v, ctx);
    }
    if constexpr (std::is_pointer_v<T>) {
      ReconstructionContext::keep_alive(sp);
      out = sp.get();
    } else {
      out = sp;
    }
  }
}

template <class T>
void assign_sequence(T& out, const Sequence& s, ReconstructionContext& ctx) {
  if constexpr (is_std_pair<T>::value) {
    using First = std::remove_cv_t<typename T::first_type>;
    if (s.items.size() > 0) assign_from(const_cast<First&>(out.first), s.items[0], ctx);
    if (s.items.size() > 1) assign_from(out.second, s.items[1], ctx);
  } else if constexpr (requires { std::tuple_size<T>::value; }) {
    for (std::size_t i = 0; i < s.items.size() && i < out.size(); ++i) assign_from(out[i], s.items[i], ctx);
  } else if constexpr (requires(T& t, typename T::value_type x) { t.push_back(x); }) {
    out.clear();
    for (const auto& item : s.items) {
      typename T::value_type element{};
      assign_from(element, item, ctx);
      out.push_back(std::move(element));
    }
  } else if constexpr (requires { typename T::mapped_type; }) {
    out.clear();
    for (const auto& item : s.items) {
      std::pair<std::remove_cv_t<typename T::key_type>, typename T::mapped_type> element{};
      if (const auto* pair = std::get_if<Sequence>(&item.node)) assign_sequence(element, *pair, ctx);
      out.insert(std::move(element));
    }
  } else {
    out.clear();
    for (const auto& item : s.items) {
      typename T::value_type element{};
      assign_from(element, item, ctx);
      out.insert(std::move(element));
    }
  }
}

}  // namespace detail

/// Overwrites the parts of `out` present in `v`; absent or truncated parts
/// keep their default-constructed state.
template <class T>
void assign_from(T& out, const ObservedValue& v, ReconstructionContext& ctx) {
  using U = std::remove_cv_t<T>;
  if constexpr (detail::is_primitive_v<U>) {
    if (const auto* p = std::get_if<Primitive>(&v.node)) detail::assign_primitive(out, *p);
  } else if constexpr (Reflected<U>) {
    const auto* o = std::get_if<ObjectValue>(&v.node);
    if (!o) return;
    Reflect<U>::visit(out, [&](std::string_view name, auto& member) {
      if (const ObservedValue* f = o->find_field(name)) assign_from(member, *f, ctx);
    });
  } else if constexpr (detail::is_pointer_like_v<U>) {
    detail::assign_pointer(out, v, ctx);
  } else if constexpr (detail::is_std_pair<U>::value || detail::Iterable<U>) {
    if (const auto* s = std::get_if<Sequence>(&v.node)) detail::assign_sequence(out, *s, ctx);
  }
}

template <class T>
T from_observed(const ObservedValue& v) {
  T out{};
  ReconstructionContext ctx;
  assign_from(out, v, ctx);
  return out;
}

}  // namespace testgen

#define TESTGEN_PP_PARENS ()
#define TESTGEN_PP_EXPAND(...) TESTGEN_PP_EXPAND3(TESTGEN_PP_EXPAND3(TESTGEN_PP_EXPAND3(TESTGEN_PP_EXPAND3(__VA_ARGS__))))
#define TESTGEN_PP_EXPAND3(...) TESTGEN_PP_EXPAND2(TESTGEN_PP_EXPAND2(TESTGEN_PP_EXPAND2(TESTGEN_PP_EXPAND2(__VA_ARGS__))))
#define TESTGEN_PP_EXPAND2(...) TESTGEN_PP_EXPAND1(TESTGEN_PP_EXPAND1(TESTGEN_PP_EXPAND1(TESTGEN_PP_EXPAND1(__VA_ARGS__))))
#define TESTGEN_PP_EXPAND1(...) __VA_ARGS__
#define TESTGEN_PP_FOR_EACH(macro, ...) \
  __VA_OPT__(TESTGEN_PP_EXPAND(TESTGEN_PP_FOR_EACH_HELPER(macro, __VA_ARGS__)))
#define TESTGEN_PP_FOR_EACH_HELPER(macro, a1, ...) \
  macro(a1) __VA_OPT__(TESTGEN_PP_FOR_EACH_AGAIN TESTGEN_PP_PARENS(macro, __VA_ARGS__))
#define TESTGEN_PP_FOR_EACH_AGAIN() TESTGEN_PP_FOR_EACH_HELPER
#define TESTGEN_PP_VISIT_FIELD(f) visit_field(#f, self.f);

/// Registers `Type` (fully qualified, at global scope) and the listed fields.
#define TESTGEN_REFLECT(Type, ...)                                  \
  template <>                                                       \
  struct testgen::Reflect<Type> {                                   \
    static constexpr std::string_view name = #Type;                 \
    template <class Self, class Visitor>                            \
    static void visit([[maybe_unused]] Self& self,                  \
                      [[maybe_unused]] Visitor&& visit_field) {     \
      TESTGEN_PP_FOR_EACH(TESTGEN_PP_VISIT_FIELD, __VA_ARGS__)      \
    }                                                               \
  };

#define TESTGEN_FRIEND(Type) friend struct ::testgen::Reflect<Type>;
