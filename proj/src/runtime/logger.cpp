#include "testgen/runtime/logger.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <cstdlib>
#include <memory>
#include <mutex>

#include "testgen/runtime/store.hpp"

namespace testgen {

namespace {

struct GlobalState {
  std::unique_ptr<RunStore> store;
  std::unique_ptr<SerializationSession> session;

  std::string root;

  ~GlobalState() {
    if (store) store->close();
    if (session && !session->diagnostics().empty()) {
      std::ofstream out(run_dir(root, session->config().run_id) / "diagnostics", std::ios::app);
      for (const auto& d : session->diagnostics().entries()) out << Diagnostics::format(d) << "\n";
    }
  }
};

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return (v && *v) ? v : nullptr;
}

GlobalState* make_state() {
  const char* root = env("TESTGEN_STORE");
  if (!root) return nullptr;
  SessionConfig config;
  if (const char* d = env("TESTGEN_MAX_DEPTH")) config.max_depth = std::max(1, std::atoi(d));
  if (const char* b = env("TESTGEN_BACKGROUND")) config.log_on_different_thread = std::string(b) != "0";
  if (const char* s = env("TESTGEN_SEED")) config.random_seed = std::strtoull(s, nullptr, 10);
  if (const char* r = env("TESTGEN_RUN_ID")) {
    config.run_id = r;
  } else {
    config.run_id = "run-" + std::to_string(std::chrono::system_clock::now().time_since_epoch().count()) +
                    "-" + std::to_string(::getpid());
  }
  auto* state = new GlobalState();
  state->root = root;
  try {
    create_run(root, RunMeta{config.run_id, config.max_depth, std::string(kToolVersion)});
    state->store = std::make_unique<RunStore>(root, config.run_id);
    state->session = std::make_unique<SerializationSession>(config, state->store.get());
  } catch (...) {
    delete state;
    return nullptr;
  }
  return state;
}

std::mutex g_mutex;
bool g_initialized = false;
std::unique_ptr<GlobalState> g_state;

}  // namespace

SerializationSession* global_session() {
  std::lock_guard lock(g_mutex);
  if (!g_initialized) {
    g_initialized = true;
    g_state.reset(make_state());
  }
  return g_state ? g_state->session.get() : nullptr;
}

void shutdown_global_session() {
  std::lock_guard lock(g_mutex);
  if (g_state && g_state->store) g_state->store->close();
}

ObservationLogger::ObservationLogger(const MethodId& method) : session_(global_session()), method_(method) {
  if (session_) invocation_ = session_->next_invocation_id();
}

void ObservationLogger::log(ObsKind kind, std::optional<int> index, long line, long column, Handle value) noexcept {
  if (!session_) return;
  if (session_->sink()) {
    auto* store = static_cast<RunStore*>(session_->sink());
    if (store->closed()) return;
  }
  session_->log_observation(method_, kind, index, line, column, value, invocation_);
}

}  // namespace testgen
