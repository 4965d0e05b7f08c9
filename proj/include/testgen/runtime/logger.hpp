#pragma once

// Runtime entry points called from instrumented functions.
//
// The process-wide session is configured from the environment:
//   TESTGEN_STORE       store root; logging is disabled when unset
//   TESTGEN_RUN_ID      run to append to (generated when unset)
//   TESTGEN_MAX_DEPTH   serialization depth limit (default 5)
//   TESTGEN_BACKGROUND  0 to wait for each record to reach disk (default 1)
//   TESTGEN_SEED        optional seed for any sampling the logger performs

#include <optional>
#include <string>
#include <type_traits>

#include "testgen/model/value.hpp"
#include "testgen/runtime/reflect.hpp"
#include "testgen/runtime/serializer.hpp"

namespace testgen {

/// The session for this process, or nullptr when observation logging is off.
SerializationSession* global_session();

/// Flushes and closes the process-wide store early (it is also closed at exit).
void shutdown_global_session();

/// The returned name as the function's declared return type: a reference
/// when the types already agree, otherwise a converted copy (for example a
/// char array returned as std::string).
template <class R, class T>
decltype(auto) as_return(const T& value) {
  using D = std::remove_cvref_t<R>;
  if constexpr (std::is_same_v<D, T> || !std::is_constructible_v<D, const T&>) {
    return (value);
  } else {
    return D(value);
  }
}

/// One instance per dynamic invocation of an instrumented function.
class ObservationLogger {
 public:
  explicit ObservationLogger(const MethodId& method);

  template <class T>
  void log_receiver(const T& self) noexcept {
    log(ObsKind::CurrentObjInst, std::nullopt, -1, -1, make_handle(self));
  }

  template <class T>
  void log_param(int index, const T& value, long line, long column) noexcept {
    log(ObsKind::Parameter, index, line, column, make_handle(value));
  }

  template <class T>
  void log_return(const T& value, long line, long column) noexcept {
    log(ObsKind::Return, std::nullopt, line, column, make_handle(value));
  }

 private:
  void log(ObsKind kind, std::optional<int> index, long line, long column, Handle value) noexcept;

  SerializationSession* session_;
  const MethodId& method_;
  std::string invocation_;
};

}  // namespace testgen
