#include "testgen/model/diagnostics.hpp"

namespace testgen {

void Diagnostics::add(std::string stage, std::string code, std::string message) {
  std::lock_guard lock(mutex_);
  entries_.push_back({std::move(stage), std::move(code), std::move(message)});
}

std::vector<Diagnostic> Diagnostics::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

std::size_t Diagnostics::count(const std::string& code) const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& d : entries_) n += d.code == code ? 1 : 0;
  return n;
}

std::size_t Diagnostics::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string Diagnostics::format(const Diagnostic& d) {
  return "[" + d.stage + "] " + d.code + ": " + d.message;
}

}  // namespace testgen
