#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "testgen/model/diagnostics.hpp"
#include "testgen/model/value.hpp"
#include "testgen/runtime/serializer.hpp"

namespace testgen {

inline constexpr std::string_view kToolVersion = "1.0";

struct RunMeta {
  std::string run_id;
  int max_depth = kDefaultMaxDepth;
  std::string tool_version{kToolVersion};
};

/// Layout helpers: <root>/<runId>/observations.ndrec and <root>/<runId>/meta.
std::filesystem::path run_dir(const std::filesystem::path& root, const std::string& run_id);
std::filesystem::path records_path(const std::filesystem::path& root, const std::string& run_id);
std::filesystem::path meta_path(const std::filesystem::path& root, const std::string& run_id);

/// Creates the run directory and writes its meta file (idempotent).
void create_run(const std::filesystem::path& root, const RunMeta& meta);
RunMeta read_meta(const std::filesystem::path& root, const std::string& run_id);

/// Append-only record log for one run. Appends from any thread are queued and
/// written by a single background writer, one record per line. Several
/// processes may append to the same run; each line is one write(2) on an
/// O_APPEND descriptor.
class RunStore final : public ObservationSink {
 public:
  RunStore(std::filesystem::path root, std::string run_id);
  ~RunStore() override;

  RunStore(const RunStore&) = delete;
  RunStore& operator=(const RunStore&) = delete;

  std::uint64_t append(ObservationRecord record) override;
  void flush() override;
  void close();
  bool closed() const { return closed_.load(); }

  const std::string& run_id() const { return run_id_; }
  Diagnostics& diagnostics() { return diagnostics_; }

 private:
  void writer_loop();
  void write_batch(const std::string& batch);

  std::filesystem::path root_;
  std::string run_id_;
  int fd_ = -1;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable drained_;
  std::deque<std::string> queue_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t enqueued_ = 0;
  std::uint64_t written_ = 0;
  std::atomic<bool> closed_{false};
  bool stopping_ = false;
  Diagnostics diagnostics_;
  std::thread writer_;
};

/// Every complete record of a run, ordered by seqNr (stable for equal seqNr).
/// Lines that do not decode, such as a torn final write, are skipped and
/// reported. Throws Error(MissingRun) when the run directory does not exist.
std::vector<ObservationRecord> read_all(const std::filesystem::path& root, const std::string& run_id,
                                        Diagnostics* diagnostics = nullptr);

}  // namespace testgen
