#include "testgen/runtime/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "testgen/model/codec.hpp"
#include "testgen/model/errors.hpp"

namespace fs = std::filesystem;

namespace testgen {

fs::path run_dir(const fs::path& root, const std::string& run_id) { return root / run_id; }

fs::path records_path(const fs::path& root, const std::string& run_id) {
  return run_dir(root, run_id) / "observations.ndrec";
}

fs::path meta_path(const fs::path& root, const std::string& run_id) { return run_dir(root, run_id) / "meta"; }

void create_run(const fs::path& root, const RunMeta& meta) {
  std::error_code ec;
  fs::create_directories(run_dir(root, meta.run_id), ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create run directory: " + ec.message());
  fs::path path = meta_path(root, meta.run_id);
  if (fs::exists(path)) return;
  std::ofstream out(path);
  out << "runId=" << meta.run_id << "\n"
      << "maxDepth=" << meta.max_depth << "\n"
      << "toolVersion=" << meta.tool_version << "\n";
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

RunMeta read_meta(const fs::path& root, const std::string& run_id) {
  if (!fs::is_directory(run_dir(root, run_id))) {
    throw Error(ErrorCode::MissingRun, "no run '" + run_id + "' under " + root.string());
  }
  RunMeta meta;
  meta.run_id = run_id;
  std::ifstream in(meta_path(root, run_id));
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "maxDepth") meta.max_depth = std::stoi(value);
    if (key == "toolVersion") meta.tool_version = value;
  }
  return meta;
}

RunStore::RunStore(fs::path root, std::string run_id) : root_(std::move(root)), run_id_(std::move(run_id)) {
  std::error_code ec;
  fs::create_directories(run_dir(root_, run_id_), ec);
  fd_ = ::open(records_path(root_, run_id_).c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error(ErrorCode::IoFailure, "cannot open store: " + std::string(std::strerror(errno)));
  }
  writer_ = std::thread([this] { writer_loop(); });
}

RunStore::~RunStore() { close(); }

std::uint64_t RunStore::append(ObservationRecord record) {
  std::unique_lock lock(mutex_);
  if (closed_.load()) throw Error(ErrorCode::StoreClosed, "append after close");
  record.seq_nr = next_seq_++;
  if (record.run_id.empty()) record.run_id = run_id_;
  std::uint64_t seq = record.seq_nr;
  // Encoding under the lock keeps queue order equal to seqNr order.
  queue_.push_back(encode_record(record) + "\n");
  ++enqueued_;
  lock.unlock();
  wake_.notify_one();
  return seq;
}

void RunStore::flush() {
  std::unique_lock lock(mutex_);
  drained_.wait(lock, [this] { return written_ == enqueued_ || fd_ < 0; });
}

void RunStore::close() {
  {
    std::lock_guard lock(mutex_);
    if (closed_.exchange(true)) return;
    stopping_ = true;
  }
  wake_.notify_one();
  if (writer_.joinable()) writer_.join();
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  drained_.notify_all();
}

void RunStore::writer_loop() {
  std::unique_lock lock(mutex_);
  while (true) {
    wake_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
    if (queue_.empty() && stopping_) return;
    std::size_t taken = 0;
    std::string batch;
    while (!queue_.empty()) {
      batch += queue_.front();
      queue_.pop_front();
      ++taken;
    }
    lock.unlock();
    write_batch(batch);
    lock.lock();
    written_ += taken;
    drained_.notify_all();
  }
}

void RunStore::write_batch(const std::string& batch) {
  const char* data = batch.data();
  std::size_t left = batch.size();
  while (left > 0) {
    ssize_t n = ::write(fd_, data, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      diagnostics_.add("store", "IoFailure", std::strerror(errno));
      return;
    }
    data += n;
    left -= static_cast<std::size_t>(n);
  }
}

std::vector<ObservationRecord> read_all(const fs::path& root, const std::string& run_id, Diagnostics* diagnostics) {
  if (!fs::is_directory(run_dir(root, run_id))) {
    throw Error(ErrorCode::MissingRun, "no run '" + run_id + "' under " + root.string());
  }
  std::vector<ObservationRecord> records;
  std::ifstream in(records_path(root, run_id), std::ios::binary);
  if (!in) return records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(decode_record(line));
    } catch (const Error& e) {
      if (diagnostics) {
        diagnostics->add("store", "TornRecord", "line " + std::to_string(line_no) + " skipped: " + e.what());
      }
    }
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const ObservationRecord& a, const ObservationRecord& b) { return a.seq_nr < b.seq_nr; });
  return records;
}

}  // namespace testgen
