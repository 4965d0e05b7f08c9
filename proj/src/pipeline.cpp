#include "testgen/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <random>

#include "testgen/model/errors.hpp"
#include "testgen/resolve/resolver.hpp"
#include "testgen/runtime/store.hpp"

namespace fs = std::filesystem;

namespace testgen {

namespace {

class ScratchDir {
 public:
  ScratchDir(const fs::path& requested, bool keep) : keep_(keep || !requested.empty()) {
    if (!requested.empty()) {
      path_ = fs::absolute(requested);
    } else {
      std::random_device rd;
      path_ = fs::temp_directory_path() / ("testgen-work-" + std::to_string(rd()) + std::to_string(rd()));
    }
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    if (!keep_) fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  bool keep_;
};

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + p.string());
}

std::string quote(const std::string& s) {
  if (s.find_first_of(" '\"\\$") == std::string::npos) return s;
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

}  // namespace

std::string new_run_id() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
  std::random_device rd;
  std::uniform_int_distribution<unsigned> hex(0, 15);
  std::string suffix;
  for (int i = 0; i < 8; ++i) suffix += "0123456789abcdef"[hex(rd)];
  return std::string(stamp) + "-" + suffix;
}

InstrumentResult cmd_instrument(const PipelineConfig& config, const fs::path& out, Diagnostics& diagnostics) {
  InstrumentResult r = instrument_tree(config.source_root, out, config.annotation, diagnostics);
  if (r.instrumented.empty()) {
    throw Error(ErrorCode::PreconditionViolation, "no targets: nothing marked @" + config.annotation + " could be instrumented");
  }
  return r;
}

std::string cmd_run(const PipelineConfig& config, Diagnostics& diagnostics, std::string run_id, std::string* driver_output) {
  if (config.max_depth < 1) throw Error(ErrorCode::PreconditionViolation, "maxDepth must be at least 1");
  if (config.driver.empty()) throw Error(ErrorCode::PreconditionViolation, "no driver command given");
  if (run_id.empty()) run_id = new_run_id();
  fs::path store = fs::absolute(config.store);
  create_run(store, RunMeta{run_id, config.max_depth, std::string(kToolVersion)});

  ProcessOptions opts;
  if (!config.instrumented_dir.empty()) opts.cwd = config.instrumented_dir;
  opts.timeout = std::chrono::hours(1);
  opts.env = {{"TESTGEN_STORE", store.string()},
              {"TESTGEN_RUN_ID", run_id},
              {"TESTGEN_MAX_DEPTH", std::to_string(config.max_depth)},
              {"TESTGEN_CXX", config.toolchain.cxx},
              {"TESTGEN_INCLUDE_DIR", config.toolchain.testgen_include.string()},
              {"TESTGEN_RUNTIME_LIB", config.toolchain.runtime_lib.string()}};
  ProcessResult r = run_shell(config.driver, opts);
  if (driver_output) *driver_output = r.output;
  if (!r.ok()) {
    throw Error(ErrorCode::DriverFailure, "driver exited with " +
                                              (r.timed_out ? std::string("a timeout")
                                                           : r.signal ? "signal " + std::to_string(r.signal)
                                                                      : "status " + std::to_string(r.exit_code)) +
                                              "; run " + run_id + " kept in " + store.string() + "\n" + r.output);
  }
  if (read_all(store, run_id, &diagnostics).empty()) {
    diagnostics.add("run", "EmptyRun", "driver executed no instrumented function; run " + run_id + " is empty");
  }
  return run_id;
}

CarveOutcome cmd_carve(const PipelineConfig& config, const std::string& run_id, Diagnostics& diagnostics) {
  CarveOutcome outcome;
  PublishReport& report = outcome.report;
  fs::path store = fs::absolute(config.store);
  InstrumentationPlan plan = discover_targets(config.source_root, config.annotation, diagnostics);
  RunMeta meta = read_meta(store, run_id);

  std::vector<ObservationRecord> records = read_all(store, run_id, &diagnostics);
  report.observations = records.size();
  SerializationMap map = get_full_serialization_map(records, meta.max_depth, &diagnostics);
  std::vector<ResolvedObservation> resolved = resolve_observations(records, map, &diagnostics);
  report.dropped_observations = records.size() - resolved.size();
  std::vector<InvocationGroup> groups = group_invocations(resolved, &diagnostics);
  report.invocations = groups.size();

  GeneratorContext ctx;
  ctx.plan = &plan;
  ctx.run_id = run_id;
  ctx.max_depth = meta.max_depth;
  ctx.regen_command = "testgen carve --source-root " + quote(config.source_root.string()) + " --store " +
                      quote(config.store.string()) + " --run-id " + quote(run_id);
  std::size_t deduped = 0;
  outcome.tests = generate_tests(groups, ctx, &diagnostics, &deduped);
  report.generated = outcome.tests.size();
  report.deduped = deduped;
  report.unsupported = groups.size() - outcome.tests.size() - deduped;

  ScratchDir work(config.work_dir, config.keep_work);
  fs::path stage = work.path() / "stage";
  for (const auto& t : outcome.tests) {
    write_text(stage / t.source_path, t.source_text);
    for (const auto& r : t.resources) write_text(stage / r.rel_path, r.content);
  }

  std::set<std::string> target_files;
  for (const auto& t : plan.targets) target_files.insert(t.file);

  std::vector<PoolEntry> pool;
  if (!outcome.tests.empty()) {
    Builder builder(config.toolchain, work.path() / "build", plan.source_root, config.include_dirs);
    builder.build_app(plan);
    // One build for the whole pool; per-test builds only when it fails, to
    // find the tests that do not compile.
    std::optional<fs::path> suite;
    try {
      suite = builder.build_suite(outcome.tests, stage);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CompileFailure) throw;
    }
    for (const auto& t : outcome.tests) {
      FlakeReport fr;
      std::set<std::string> coverage;
      try {
        std::vector<std::string> argv;
        if (suite) {
          argv = {suite->string(), "--only", "testgen_" + t.test_id};
        } else {
          argv = {builder.build_test(t, stage).string()};
        }
        std::string first_failure;
        fr = flake_gate(t.test_id, [&](int run) {
          if (run == 0) builder.reset_coverage();
          ProcessOptions opts;
          opts.env = {{"TESTGEN_RESOURCE_ROOT", stage.string()}};
          opts.timeout = std::chrono::seconds(60);
          ProcessResult r = run_process(argv, opts);
          if (run == 0) coverage = builder.collect_coverage(target_files);
          if (!r.ok() && first_failure.empty()) first_failure = r.output.empty() ? "no output" : r.output;
          return r.ok();
        });
        fr.detail = first_failure;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::CompileFailure) throw;
        fr.test_id = t.test_id;
        fr.verdict = Verdict::Broken;
        fr.detail = e.what();
        diagnostics.add("publish", "CompileFailure", t.test_id + " (" + t.source_path + ") does not build");
      }
      switch (fr.verdict) {
        case Verdict::StablePass:
          ++report.stable;
          pool.push_back(PoolEntry{t.test_id, coverage});
          break;
        case Verdict::Flaky:
          ++report.flaky;
          break;
        case Verdict::Broken:
          ++report.broken;
          break;
      }
      report.flake_reports.push_back(std::move(fr));
    }
  }

  std::vector<std::string> order = select_tests(pool);
  std::set<std::string> covered;
  for (const auto& p : pool) covered.insert(p.coverage.begin(), p.coverage.end());
  report.covered_items = covered.size();
  report.selected = order.size();
  report.selected_ids = order;

  std::map<std::string, const TestCase*> by_id;
  for (const auto& t : outcome.tests) by_id[t.test_id] = &t;
  BundleInputs bundle;
  bundle.keep_flaky_report = config.keep_flaky_report;
  TypeIndex index = build_type_index(plan);
  for (const auto& id : order) {
    const TestCase* t = by_id.at(id);
    bundle.suite.push_back(t);
    DependencyResult deps = compute_dependencies(*t, index, &diagnostics);
    ManifestEntry e;
    e.test_id = t->test_id;
    e.source_path = t->source_path;
    e.method = t->method.key();
    e.dependencies = deps.dependencies;
    for (const auto& r : t->resources) e.resources.insert(r.rel_path);
    e.flagged = deps.flagged();
    bundle.manifest.tests.push_back(std::move(e));
  }
  bundle.report = report;
  bundle.cmake_lists = bundle_cmake(config.toolchain, plan, config.include_dirs, bundle.suite);
  try {
    publish(bundle, config.out);
    outcome.published = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyBundle) throw;
    diagnostics.add("publish", "EmptyBundle", e.what());
  }
  return outcome;
}

}  // namespace testgen
