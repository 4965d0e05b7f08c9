#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_set>

#include "testgen/model/diagnostics.hpp"
#include "testgen/model/value.hpp"
#include "testgen/runtime/reflect.hpp"

namespace testgen {

inline constexpr int kDefaultMaxDepth = 5;

/// Destination for completed observation records.
class ObservationSink {
 public:
  virtual ~ObservationSink() = default;
  /// Queues `record`, assigning its sequence number; returns that number.
  virtual std::uint64_t append(ObservationRecord record) = 0;
  /// Blocks until everything queued so far is written.
  virtual void flush() = 0;
};

struct SessionConfig {
  int max_depth = kDefaultMaxDepth;
  /// Makes invocation and observation ids reproducible. Processes appending
  /// to one run need distinct seeds.
  std::optional<std::uint64_t> random_seed;
  bool log_on_different_thread = true;
  std::string run_id;
};

/// Concurrent set of object ids with an atomic claim operation.
class SeenSet {
 public:
  /// Inserts `id`; true when this call inserted it.
  bool claim(const std::string& id);
  bool contains(const std::string& id) const;
  std::size_t size() const;

 private:
  static constexpr std::size_t kShards = 32;
  struct Shard {
    mutable std::mutex mutex;
    std::unordered_set<std::string> ids;
  };
  Shard& shard(const std::string& id) const;
  mutable Shard shards_[kShards];
};

/// State shared by every observation of one instrumented program execution.
class SerializationSession {
 public:
  explicit SerializationSession(SessionConfig config, ObservationSink* sink = nullptr);

  const SessionConfig& config() const { return config_; }
  int max_depth() const { return config_.max_depth; }
  SeenSet& seen() { return seen_; }
  Diagnostics& diagnostics() { return diagnostics_; }
  ObservationSink* sink() const { return sink_; }

  /// Unique per session: "<nonce>-i<n>".
  std::string next_invocation_id();

  /// Serializes `value` and hands the completed record to the sink. Never
  /// throws; failures become diagnostics.
  void log_observation(const MethodId& method, ObsKind kind, std::optional<int> param_index,
                       long line, long column, Handle value, const std::string& invocation_id);

 private:
  SessionConfig config_;
  ObservationSink* sink_;
  SeenSet seen_;
  Diagnostics diagnostics_;
  std::string nonce_;
  std::atomic<std::uint64_t> next_invocation_{0};
  std::atomic<std::uint64_t> next_obs_{0};
};

bool is_primitive(Handle h);

/// 128-bit content hash (32 hex digits) of the object's class and its
/// depth-limited state, with the object itself at depth 0. Equal states give
/// equal ids, so aliases and structural copies share one id.
std::string object_id(Handle h, int max_depth);

/// Pointer-aware, depth-aware serialization. The first time an object id is
/// met in the session it is written in full; later meetings produce a
/// PointerRef. Values below `max_depth` become DepthTruncated.
ObservedValue serialize_object(Handle h, SerializationSession& session, int depth = 0);

/// Self-contained depth-limited serialization with no session: objects that
/// recur on the current path become RecursionMarker. Used to snapshot values
/// at test time.
ObservedValue snapshot(Handle h, int max_depth, Diagnostics* diagnostics = nullptr);

template <class T>
ObservedValue serialize_object(const T& v, SerializationSession& session, int depth = 0) {
  return serialize_object(make_handle(v), session, depth);
}

template <class T>
ObservedValue snapshot(const T& v, int max_depth) {
  return snapshot(make_handle(v), max_depth);
}

}  // namespace testgen
