#pragma once

#include <mutex>
#include <string>
#include <vector>

namespace testgen {

struct Diagnostic {
  std::string stage;
  std::string code;
  std::string message;
};

/// Thread-safe collector for non-fatal problems. Anything that drops work
/// (an observation, a test) records why here instead of failing the run.
class Diagnostics {
 public:
  void add(std::string stage, std::string code, std::string message);
  std::vector<Diagnostic> entries() const;
  std::size_t count(const std::string& code) const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  /// "[stage] Code: message", one per diagnostic.
  static std::string format(const Diagnostic& d);

 private:
  mutable std::mutex mutex_;
  std::vector<Diagnostic> entries_;
};

}  // namespace testgen
