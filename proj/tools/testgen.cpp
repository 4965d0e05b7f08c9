// Command line front end: instrument, run, carve, pipeline.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <map>
#include <utility>
#include <vector>

#include "testgen/model/errors.hpp"
#include "testgen/pipeline.hpp"

namespace fs = std::filesystem;
using namespace testgen;

namespace {

// Identical diagnostics (one per dropped invocation, say) are printed once with a count.
void print_diagnostics(const Diagnostics& d) {
  std::vector<std::pair<std::string, int>> lines;
  std::map<std::string, std::size_t> seen;
  for (const auto& e : d.entries()) {
    std::string text = Diagnostics::format(e);
    auto [it, fresh] = seen.emplace(text, lines.size());
    if (fresh) lines.emplace_back(text, 0);
    ++lines[it->second].second;
  }
  for (const auto& [text, n] : lines) {
    std::cerr << text;
    if (n > 1) std::cerr << " (x" << n << ")";
    std::cerr << "\n";
  }
}

int fail(const std::string& stage, const Error& e, const Diagnostics& d) {
  print_diagnostics(d);
  std::cerr << Diagnostics::format(Diagnostic{stage, std::string(to_string(e.code())), e.what()}) << "\n";
  return 1;
}

std::string default_store() {
  const char* v = std::getenv("TESTGEN_STORE");
  return (v && *v) ? v : ".testgen-store";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carve regression unit tests from instrumented end-to-end runs"};
  app.require_subcommand(1);

  PipelineConfig config;
  config.store = default_store();
  std::string run_id;
  fs::path instrument_out;
  std::vector<std::string> include_dirs;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--source-root", config.source_root, "Root of the program's sources")->required();
    cmd->add_option("--annotation", config.annotation, "Marker name looked for in comments")
        ->default_val(std::string(kDefaultAnnotation));
  };
  auto add_store = [&](CLI::App* cmd) {
    cmd->add_option("--store", config.store, "Observation store root (env TESTGEN_STORE)");
  };
  auto add_run = [&](CLI::App* cmd) {
    cmd->add_option("--driver", config.driver, "Shell command that builds and exercises the instrumented program")
        ->required();
    cmd->add_option("--max-depth", config.max_depth, "Serialization depth limit")->default_val(5)->check(CLI::PositiveNumber);
  };
  auto add_carve = [&](CLI::App* cmd) {
    cmd->add_option("--out", config.out, "Bundle directory")->required();
    cmd->add_option("--include-dir", include_dirs, "Extra include directory for building tests");
    cmd->add_flag("--keep-flaky-report", config.keep_flaky_report, "Write flaky.json into the bundle");
    cmd->add_option("--work-dir", config.work_dir, "Keep build products here");
    cmd->add_flag("--keep-work", config.keep_work, "Do not delete the work directory");
  };

  auto* instrument = app.add_subcommand("instrument", "Rewrite marked functions to log observations");
  add_common(instrument);
  instrument->add_option("--out", instrument_out, "Destination of the instrumented tree")->required();

  auto* run = app.add_subcommand("run", "Execute a driver against the instrumented program");
  add_store(run);
  add_run(run);
  run->add_option("--run-id", run_id, "Run id (generated when omitted)");
  run->add_option("--instrumented-dir", config.instrumented_dir, "Working directory of the driver");

  auto* carve = app.add_subcommand("carve", "Generate, gate, select and publish tests from a stored run");
  add_common(carve);
  add_store(carve);
  add_carve(carve);
  carve->add_option("--run-id", run_id, "Stored run to carve")->required();

  auto* pipeline = app.add_subcommand("pipeline", "instrument, run and carve in one go");
  add_common(pipeline);
  add_store(pipeline);
  add_run(pipeline);
  add_carve(pipeline);

  CLI11_PARSE(app, argc, argv);
  for (const auto& d : include_dirs) config.include_dirs.emplace_back(d);

  Diagnostics diag;
  std::string stage = "cli";
  try {
    if (*instrument) {
      stage = "instrument";
      InstrumentResult r = cmd_instrument(config, instrument_out, diag);
      print_diagnostics(diag);
      for (const auto& t : r.instrumented) std::cout << t.method.key() << "  " << t.file << "\n";
      std::cout << r.instrumented.size() << " target(s) instrumented into " << instrument_out.string() << "\n";
      return 0;
    }
    if (*run) {
      stage = "run";
      std::string output;
      std::string id = cmd_run(config, diag, run_id, &output);
      std::cerr << output;
      print_diagnostics(diag);
      std::cout << id << "\n";
      return 0;
    }
    if (*carve) {
      stage = "carve";
      CarveOutcome c = cmd_carve(config, run_id, diag);
      print_diagnostics(diag);
      std::cout << c.report.text();
      return c.published ? 0 : 1;
    }
    if (*pipeline) {
      if (config.work_dir.empty()) {
        config.work_dir = fs::temp_directory_path() / ("testgen-pipeline-" + new_run_id());
      }
      config.instrumented_dir = config.work_dir / "instrumented";
      stage = "instrument";
      cmd_instrument(config, config.instrumented_dir, diag);
      stage = "run";
      std::string output;
      std::string id = cmd_run(config, diag, {}, &output);
      std::cerr << output;
      std::cout << "run " << id << "\n";
      stage = "carve";
      PipelineConfig carve_config = config;
      carve_config.work_dir = config.work_dir / "carve";
      CarveOutcome c = cmd_carve(carve_config, id, diag);
      print_diagnostics(diag);
      std::cout << c.report.text();
      if (!config.keep_work) {
        std::error_code ec;
        fs::remove_all(config.work_dir, ec);
      }
      return c.published ? 0 : 1;
    }
  } catch (const Error& e) {
    return fail(stage, e, diag);
  } catch (const std::exception& e) {
    print_diagnostics(diag);
    std::cerr << "[" << stage << "] InternalError: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
