#include "testgen/runtime/serializer.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "testgen/model/errors.hpp"

namespace testgen {

std::string normalize_class_name(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (c != ' ' && c != '\t' && c != '\n') out += c;
  }
  if (out.rfind("::", 0) == 0) out.erase(0, 2);
  return out;
}

void ReconstructionContext::keep_alive(std::shared_ptr<void> p) {
  static std::mutex mutex;
  static std::vector<std::shared_ptr<void>>* owned = new std::vector<std::shared_ptr<void>>();
  std::lock_guard lock(mutex);
  owned->push_back(std::move(p));
}

namespace {

/// FNV-1a over 128 bits.
class Fnv128 {
 public:
  void bytes(std::string_view s) {
    for (unsigned char c : s) {
      state_ ^= c;
      state_ *= kPrime;
    }
  }
  void tag(char c) { bytes(std::string_view(&c, 1)); }
  void text(std::string_view s) {
    bytes(s);
    tag('\0');
  }
  std::string hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(32, '0');
    unsigned __int128 v = state_;
    for (int i = 31; i >= 0; --i) {
      out[static_cast<std::size_t>(i)] = kDigits[static_cast<unsigned>(v & 0xF)];
      v >>= 4;
    }
    return out;
  }

 private:
  static constexpr unsigned __int128 kPrime =
      (static_cast<unsigned __int128>(0x0000000001000000ULL) << 64) | 0x000000000000013BULL;
  unsigned __int128 state_ =
      (static_cast<unsigned __int128>(0x6c62272e07bb0142ULL) << 64) | 0x62b821756295c58dULL;
};

Handle deref_all(Handle h) {
  // Pointers to pointers are followed all the way down.
  while (h && h.ops->kind == HandleKind::Pointer) h = h.ops->deref(h.ptr);
  return h;
}

template <class F>
class FieldLambdaSink final : public FieldSink {
 public:
  explicit FieldLambdaSink(F f) : f_(std::move(f)) {}
  void field(std::string_view name, Handle child) override { f_(name, child); }

 private:
  F f_;
};

template <class F>
class ItemLambdaSink final : public ItemSink {
 public:
  explicit ItemLambdaSink(F f) : f_(std::move(f)) {}
  void item(Handle child) override { f_(child); }

 private:
  F f_;
};

template <class F>
void for_each_field(Handle h, F&& f) {
  FieldLambdaSink sink(std::forward<F>(f));
  h.ops->fields(h.ptr, sink);
}

template <class F>
void for_each_item(Handle h, F&& f) {
  ItemLambdaSink sink(std::forward<F>(f));
  h.ops->items(h.ptr, sink);
}

void hash_state(Handle h, int depth, int max_depth, Fnv128& hash) {
  h = deref_all(h);
  if (!h) {
    hash.tag('u');
    return;
  }
  switch (h.ops->kind) {
    case HandleKind::Primitive: {
      Primitive p = h.ops->primitive(h.ptr);
      hash.tag('p');
      hash.text(to_string(p.kind));
      hash.text(p.lexeme);
      return;
    }
    case HandleKind::Object:
      if (depth > max_depth) {
        hash.tag('t');
        return;
      }
      hash.tag('o');
      hash.text(normalize_class_name(h.ops->type_name));
      for_each_field(h, [&](std::string_view name, Handle child) {
        hash.text(name);
        hash_state(child, depth + 1, max_depth, hash);
      });
      hash.tag('}');
      return;
    case HandleKind::Sequence:
      if (depth > max_depth) {
        hash.tag('t');
        return;
      }
      hash.tag('[');
      for_each_item(h, [&](Handle child) { hash_state(child, depth + 1, max_depth, hash); });
      hash.tag(']');
      return;
    default:
      hash.tag('t');
      return;
  }
}

std::string make_nonce(std::optional<std::uint64_t> seed) {
  if (seed) {
    // splitmix64 finalizer
    std::uint64_t z = *seed + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%010llx", static_cast<unsigned long long>(z & 0xffffffffffULL));
    return buf;
  }
  auto now = std::chrono::steady_clock::now().time_since_epoch().count();
  char buf[48];
  std::snprintf(buf, sizeof buf, "%x%06llx", static_cast<unsigned>(::getpid()),
                static_cast<unsigned long long>(now) & 0xffffffULL);
  return buf;
}

void unsupported(Diagnostics* diagnostics, Handle h) {
  if (diagnostics) {
    diagnostics->add("serialize", "FieldAccessFailure",
                     "type '" + std::string(h.ops->type_name) + "' is not registered for serialization");
  }
}

ObservedValue fields_into(ObjectValue obj, Handle h, const std::function<ObservedValue(Handle)>& child_fn) {
  for_each_field(h, [&](std::string_view name, Handle child) {
    obj.set_field(std::string(name), child_fn(child));
  });
  return obj;
}

}  // namespace

bool SeenSet::claim(const std::string& id) {
  Shard& s = shard(id);
  std::lock_guard lock(s.mutex);
  return s.ids.insert(id).second;
}

bool SeenSet::contains(const std::string& id) const {
  Shard& s = shard(id);
  std::lock_guard lock(s.mutex);
  return s.ids.count(id) != 0;
}

std::size_t SeenSet::size() const {
  std::size_t n = 0;
  for (auto& s : shards_) {
    std::lock_guard lock(s.mutex);
    n += s.ids.size();
  }
  return n;
}

SeenSet::Shard& SeenSet::shard(const std::string& id) const {
  return shards_[std::hash<std::string>{}(id) % kShards];
}

SerializationSession::SerializationSession(SessionConfig config, ObservationSink* sink)
    : config_(std::move(config)), sink_(sink), nonce_(make_nonce(config_.random_seed)) {
  if (config_.max_depth < 1) {
    throw Error(ErrorCode::PreconditionViolation, "maxDepth must be at least 1");
  }
}

std::string SerializationSession::next_invocation_id() {
  return nonce_ + "-i" + std::to_string(next_invocation_++);
}

void SerializationSession::log_observation(const MethodId& method, ObsKind kind,
                                           std::optional<int> param_index, long line, long column,
                                           Handle value, const std::string& invocation_id) {
  try {
    ObservationRecord record;
    record.run_id = config_.run_id;
    record.obs_id = nonce_ + "-o" + std::to_string(next_obs_++);
    record.invocation_id = invocation_id;
    record.method = method;
    record.kind = kind;
    if (kind == ObsKind::Parameter) record.param_index = param_index.value_or(0);
    if (kind == ObsKind::CurrentObjInst) {
      line = -1;
      column = -1;
    }
    record.line = line;
    record.column = column;
    record.value = serialize_object(value, *this, 0);
    if (sink_) {
      sink_->append(std::move(record));
      if (!config_.log_on_different_thread) sink_->flush();
    }
  } catch (const std::exception& e) {
    diagnostics_.add("log", "SinkFailure", e.what());
  } catch (...) {
    diagnostics_.add("log", "SinkFailure", "unknown error");
  }
}

bool is_primitive(Handle h) {
  h = deref_all(h);
  return !h || h.ops->kind == HandleKind::Primitive;
}

std::string object_id(Handle h, int max_depth) {
  Fnv128 hash;
  hash_state(h, 0, max_depth, hash);
  return hash.hex();
}

ObservedValue serialize_object(Handle h, SerializationSession& session, int depth) {
  h = deref_all(h);
  if (!h) return make_unit();
  const int max_depth = session.max_depth();
  switch (h.ops->kind) {
    case HandleKind::Primitive:
      return h.ops->primitive(h.ptr);
    case HandleKind::Sequence: {
      if (depth > max_depth) return DepthTruncated{};
      Sequence seq;
      for_each_item(h, [&](Handle child) { seq.items.push_back(serialize_object(child, session, depth + 1)); });
      return seq;
    }
    case HandleKind::Object: {
      std::string id = object_id(h, max_depth);
      if (depth > max_depth) {
        if (session.seen().contains(id)) return PointerRef{std::move(id)};
        return DepthTruncated{};
      }
      if (!session.seen().claim(id)) return PointerRef{std::move(id)};
      ObjectValue obj;
      obj.id = std::move(id);
      obj.class_name = normalize_class_name(h.ops->type_name);
      return fields_into(std::move(obj), h,
                         [&](Handle child) { return serialize_object(child, session, depth + 1); });
    }
    default:
      unsupported(&session.diagnostics(), h);
      return DepthTruncated{};
  }
}

namespace {

ObservedValue snapshot_at(Handle h, int depth, int max_depth, std::vector<std::string>& path,
                          Diagnostics* diagnostics) {
  h = deref_all(h);
  if (!h) return make_unit();
  switch (h.ops->kind) {
    case HandleKind::Primitive:
      return h.ops->primitive(h.ptr);
    case HandleKind::Sequence: {
      if (depth > max_depth) return DepthTruncated{};
      Sequence seq;
      for_each_item(h, [&](Handle child) {
        seq.items.push_back(snapshot_at(child, depth + 1, max_depth, path, diagnostics));
      });
      return seq;
    }
    case HandleKind::Object: {
      std::string id = object_id(h, max_depth);
      for (const auto& ancestor : path) {
        if (ancestor == id) return RecursionMarker{std::move(id)};
      }
      if (depth > max_depth) return DepthTruncated{};
      ObjectValue obj;
      obj.id = id;
      obj.class_name = normalize_class_name(h.ops->type_name);
      path.push_back(std::move(id));
      ObservedValue out = fields_into(std::move(obj), h, [&](Handle child) {
        return snapshot_at(child, depth + 1, max_depth, path, diagnostics);
      });
      path.pop_back();
      return out;
    }
    default:
      unsupported(diagnostics, h);
      return DepthTruncated{};
  }
}

}  // namespace

ObservedValue snapshot(Handle h, int max_depth, Diagnostics* diagnostics) {
  std::vector<std::string> path;
  return snapshot_at(h, 0, max_depth, path, diagnostics);
}

}  // namespace testgen
