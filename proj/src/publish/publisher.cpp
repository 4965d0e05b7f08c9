#include "testgen/publish/publisher.hpp"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <queue>

#include "testgen/model/errors.hpp"

namespace fs = std::filesystem;

namespace testgen {

namespace {

bool is_header_path(const std::string& p) {
  auto ext = fs::path(p).extension().string();
  return ext == ".h" || ext == ".hh" || ext == ".hpp" || ext == ".hxx";
}

std::set<std::string> include_closure(const InstrumentationPlan& plan, const std::string& file) {
  std::set<std::string> seen{file};
  std::queue<std::string> todo;
  todo.push(file);
  while (!todo.empty()) {
    const SourceFile* sf = plan.file(todo.front());
    todo.pop();
    if (!sf) continue;
    for (const auto& inc : sf->resolved_includes) {
      if (seen.insert(inc).second) todo.push(inc);
    }
  }
  return seen;
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + p.string());
}

}  // namespace

TypeIndex build_type_index(const InstrumentationPlan& plan) {
  TypeIndex index;
  for (const auto& f : plan.files) {
    auto deps = include_closure(plan, f.rel_path);
    deps.insert("lib:app");
    index.units[f.rel_path] = std::move(deps);
  }
  for (const auto& [type, provider] : plan.type_index) {
    auto deps = include_closure(plan, provider);
    if (!is_header_path(provider)) deps.insert("lib:app");
    index.providers[normalize_type_name(type)] = std::move(deps);
  }
  return index;
}

DependencyResult compute_dependencies(const TestCase& test, const TypeIndex& index, Diagnostics* diagnostics) {
  DependencyResult r;
  if (auto it = index.units.find(test.target_file); it != index.units.end()) {
    r.dependencies = it->second;
  } else {
    r.dependencies = {test.target_file, "lib:app"};
  }
  for (const auto& type : test.observed_types) {
    auto it = index.providers.find(normalize_type_name(type));
    if (it == index.providers.end()) {
      r.unknown_types.push_back(type);
      if (diagnostics) diagnostics->add("publish", "UnknownType", test.test_id + ": no provider for " + type);
      continue;
    }
    r.dependencies.insert(it->second.begin(), it->second.end());
  }
  return r;
}

std::string manifest_json(const Manifest& manifest) {
  nlohmann::ordered_json tests = nlohmann::ordered_json::array();
  for (const auto& e : manifest.tests) {
    tests.push_back({{"id", e.test_id},
                     {"method", e.method},
                     {"source", e.source_path},
                     {"resources", e.resources},
                     {"dependencies", e.dependencies},
                     {"flagged", e.flagged}});
  }
  nlohmann::ordered_json doc = {{"format", "testgen-manifest-1"}, {"tests", tests}};
  return doc.dump(2) + "\n";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::StablePass:
      return "stable-pass";
    case Verdict::Flaky:
      return "flaky";
    case Verdict::Broken:
      return "broken";
  }
  return "broken";
}

Verdict classify(const std::vector<bool>& runs) {
  auto passed = std::count(runs.begin(), runs.end(), true);
  if (!runs.empty() && passed == static_cast<long>(runs.size())) return Verdict::StablePass;
  if (passed == 0) return Verdict::Broken;
  return Verdict::Flaky;
}

FlakeReport flake_gate(const std::string& test_id, const TestRunner& runner) {
  FlakeReport report;
  report.test_id = test_id;
  for (int i = 0; i < kFlakeRuns; ++i) report.runs.push_back(runner(i));
  report.verdict = classify(report.runs);
  return report;
}

std::vector<std::string> select_tests(const std::vector<PoolEntry>& pool) {
  std::vector<std::string> suite;
  std::set<std::string> covered;
  std::vector<bool> taken(pool.size(), false);
  while (true) {
    std::size_t best = pool.size();
    std::size_t best_gain = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (taken[i]) continue;
      std::size_t gain = 0;
      for (const auto& item : pool[i].coverage) gain += covered.count(item) ? 0 : 1;
      if (gain == 0) continue;
      bool better = best == pool.size() || gain > best_gain ||
                    (gain == best_gain && (pool[i].coverage.size() > pool[best].coverage.size() ||
                                           (pool[i].coverage.size() == pool[best].coverage.size() &&
                                            pool[i].test_id < pool[best].test_id)));
      if (better) {
        best = i;
        best_gain = gain;
      }
    }
    if (best == pool.size()) break;
    taken[best] = true;
    suite.push_back(pool[best].test_id);
    covered.insert(pool[best].coverage.begin(), pool[best].coverage.end());
  }
  return suite;
}

std::string PublishReport::json() const {
  nlohmann::ordered_json flakes = nlohmann::ordered_json::array();
  for (const auto& f : flake_reports) {
    flakes.push_back({{"id", f.test_id}, {"runs", f.runs}, {"verdict", std::string(to_string(f.verdict))}});
  }
  nlohmann::ordered_json doc = {{"observations", observations},
                                {"droppedObservations", dropped_observations},
                                {"invocations", invocations},
                                {"generated", generated},
                                {"deduped", deduped},
                                {"unsupported", unsupported},
                                {"broken", broken},
                                {"flaky", flaky},
                                {"stable", stable},
                                {"selected", selected},
                                {"coveredItems", covered_items},
                                {"selectedTests", selected_ids},
                                {"flakeGate", flakes}};
  return doc.dump(2) + "\n";
}

std::string PublishReport::text() const {
  std::string s;
  auto line = [&s](const std::string& k, std::size_t v) { s += k + ": " + std::to_string(v) + "\n"; };
  line("observations", observations);
  line("dropped observations", dropped_observations);
  line("invocations", invocations);
  line("generated", generated);
  line("deduped", deduped);
  line("unsupported", unsupported);
  line("broken", broken);
  line("flaky", flaky);
  line("stable", stable);
  line("selected", selected);
  line("covered lines", covered_items);
  return s;
}

void publish(const BundleInputs& inputs, const fs::path& out_dir) {
  if (inputs.suite.empty()) throw Error(ErrorCode::EmptyBundle, "no test survived selection; nothing to publish");
  fs::path target = fs::absolute(out_dir).lexically_normal();
  if (target.filename().empty()) target = target.parent_path();
  fs::create_directories(target.parent_path());
  std::string tag = std::to_string(::getpid());
  fs::path staging = target.parent_path() / ("." + target.filename().string() + ".tmp-" + tag);
  fs::path old = target.parent_path() / ("." + target.filename().string() + ".old-" + tag);
  std::error_code ec;
  fs::remove_all(staging, ec);

  try {
    for (const TestCase* t : inputs.suite) {
      write_text(staging / t->source_path, t->source_text);
      for (const auto& r : t->resources) write_text(staging / r.rel_path, r.content);
    }
    write_text(staging / "manifest.json", manifest_json(inputs.manifest));
    write_text(staging / "report.json", inputs.report.json());
    write_text(staging / "report.txt", inputs.report.text());
    if (inputs.keep_flaky_report) {
      nlohmann::ordered_json flaky = nlohmann::ordered_json::array();
      for (const auto& f : inputs.report.flake_reports) {
        if (f.verdict != Verdict::Flaky) continue;
        flaky.push_back({{"id", f.test_id}, {"runs", f.runs}, {"firstFailure", f.detail}});
      }
      write_text(staging / "flaky.json", flaky.dump(2) + "\n");
    }
    if (!inputs.cmake_lists.empty()) write_text(staging / "CMakeLists.txt", inputs.cmake_lists);
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }

  fs::remove_all(old, ec);
  bool had_old = fs::exists(target);
  if (had_old) {
    fs::rename(target, old, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot move aside " + target.string() + ": " + ec.message());
  }
  fs::rename(staging, target, ec);
  if (ec) {
    if (had_old) fs::rename(old, target);
    throw Error(ErrorCode::IoFailure, "cannot publish to " + target.string() + ": " + ec.message());
  }
  fs::remove_all(old, ec);
}

}  // namespace testgen
