#include "testgen/publish/builder.hpp"

#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "testgen/model/errors.hpp"

namespace fs = std::filesystem;

namespace testgen {

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? std::string(v) : fallback;
}

std::string object_name(const std::string& rel) {
  std::string out;
  for (char c : rel) out += (c == '/' || c == '.' || c == '\\') ? '_' : c;
  return out + ".o";
}

void require(const ProcessResult& r, const std::string& what) {
  if (!r.ok()) throw Error(ErrorCode::CompileFailure, what + " failed:\n" + r.output);
}

}  // namespace

Toolchain Toolchain::detect() {
  Toolchain t;
#ifdef TESTGEN_CXX
  t.cxx = TESTGEN_CXX;
#else
  t.cxx = "c++";
#endif
#ifdef TESTGEN_INCLUDE_DIR
  t.testgen_include = TESTGEN_INCLUDE_DIR;
#endif
#ifdef TESTGEN_RUNTIME_LIB
  t.runtime_lib = TESTGEN_RUNTIME_LIB;
#endif
#ifdef TESTGEN_TEST_MAIN_LIB
  t.test_main_lib = TESTGEN_TEST_MAIN_LIB;
#endif
  t.cxx = env_or("TESTGEN_CXX", t.cxx);
  t.testgen_include = env_or("TESTGEN_INCLUDE_DIR", t.testgen_include.string());
  t.runtime_lib = env_or("TESTGEN_RUNTIME_LIB", t.runtime_lib.string());
  t.test_main_lib = env_or("TESTGEN_TEST_MAIN_LIB", t.test_main_lib.string());
  return t;
}

ProcessResult build_program(const Toolchain& toolchain, const std::vector<fs::path>& sources,
                            const std::vector<fs::path>& include_dirs, const fs::path& exe) {
  std::vector<std::string> argv{toolchain.cxx};
  argv.insert(argv.end(), toolchain.flags.begin(), toolchain.flags.end());
  argv.push_back("-I" + toolchain.testgen_include.string());
  for (const auto& d : include_dirs) argv.push_back("-I" + d.string());
  for (const auto& s : sources) argv.push_back(s.string());
  argv.push_back(toolchain.runtime_lib.string());
  argv.push_back("-pthread");
  argv.push_back("-o");
  argv.push_back(exe.string());
  fs::create_directories(exe.parent_path());
  return run_process(argv);
}

std::vector<std::string> library_sources(const InstrumentationPlan& plan) {
  std::vector<std::string> out;
  for (const auto& f : plan.files) {
    auto ext = fs::path(f.rel_path).extension().string();
    bool header = ext == ".h" || ext == ".hh" || ext == ".hpp" || ext == ".hxx";
    if (!header && !f.scan.has_main) out.push_back(f.rel_path);
  }
  return out;
}

Builder::Builder(Toolchain toolchain, fs::path work_dir, fs::path source_root, std::vector<fs::path> include_dirs)
    : toolchain_(std::move(toolchain)),
      work_dir_(fs::absolute(work_dir)),
      source_root_(fs::weakly_canonical(source_root)),
      include_dirs_(std::move(include_dirs)) {
  fs::create_directories(work_dir_ / "app");
  fs::create_directories(work_dir_ / "tests");
}

std::vector<std::string> Builder::compile_flags() const {
  std::vector<std::string> f = toolchain_.flags;
  f.push_back("--coverage");
  f.push_back("-I" + toolchain_.testgen_include.string());
  f.push_back("-I" + source_root_.string());
  for (const auto& d : include_dirs_) f.push_back("-I" + fs::absolute(d).string());
  return f;
}

void Builder::build_app(const InstrumentationPlan& plan) {
  app_objects_.clear();
  for (const auto& rel : library_sources(plan)) {
    fs::path obj = work_dir_ / "app" / object_name(rel);
    std::vector<std::string> argv{toolchain_.cxx};
    auto flags = compile_flags();
    argv.insert(argv.end(), flags.begin(), flags.end());
    argv.insert(argv.end(), {"-c", (source_root_ / rel).string(), "-o", obj.string()});
    require(run_process(argv), "compiling " + rel);
    app_objects_.push_back(obj);
  }
}

fs::path Builder::build_test(const TestCase& test, const fs::path& stage_dir) {
  fs::path obj = work_dir_ / "tests" / (test.test_id + ".o");
  fs::path exe = work_dir_ / "tests" / test.test_id;
  std::vector<std::string> argv{toolchain_.cxx};
  auto flags = compile_flags();
  argv.insert(argv.end(), flags.begin(), flags.end());
  argv.insert(argv.end(), {"-c", fs::absolute(stage_dir / test.source_path).string(), "-o", obj.string()});
  require(run_process(argv), "compiling test " + test.test_id);

  std::vector<std::string> link{toolchain_.cxx, "--coverage", obj.string()};
  for (const auto& o : app_objects_) link.push_back(o.string());
  link.insert(link.end(), {toolchain_.test_main_lib.string(), toolchain_.runtime_lib.string(), "-pthread", "-o",
                           exe.string()});
  require(run_process(link), "linking test " + test.test_id);
  test_objects_.push_back(obj);
  return exe;
}

fs::path Builder::build_suite(const std::vector<TestCase>& tests, const fs::path& stage_dir) {
  fs::path unity = work_dir_ / "tests" / "suite.cpp";
  fs::path obj = work_dir_ / "tests" / "suite.o";
  fs::path exe = work_dir_ / "tests" / "suite";
  {
    std::ofstream out(unity, std::ios::trunc);
    for (const auto& t : tests) out << "#include \"" << fs::absolute(stage_dir / t.source_path).string() << "\"\n";
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + unity.string());
  }
  std::vector<std::string> argv{toolchain_.cxx};
  auto flags = compile_flags();
  argv.insert(argv.end(), flags.begin(), flags.end());
  argv.insert(argv.end(), {"-c", unity.string(), "-o", obj.string()});
  require(run_process(argv), "compiling the test suite");

  std::vector<std::string> link{toolchain_.cxx, "--coverage", obj.string()};
  for (const auto& o : app_objects_) link.push_back(o.string());
  link.insert(link.end(), {toolchain_.test_main_lib.string(), toolchain_.runtime_lib.string(), "-pthread", "-o",
                           exe.string()});
  require(run_process(link), "linking the test suite");
  test_objects_.push_back(obj);
  return exe;
}

void Builder::reset_coverage() const {
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(work_dir_, ec); it != fs::recursive_directory_iterator(); ++it) {
    if (it->path().extension() == ".gcda") fs::remove(it->path(), ec);
  }
}

std::set<std::string> Builder::collect_coverage(const std::set<std::string>& files) const {
  std::set<std::string> covered;
  std::vector<std::string> argv{"gcov", "--json-format", "--stdout"};
  std::size_t with_data = 0;
  auto add = [&](const fs::path& obj) {
    fs::path gcda = obj;
    gcda.replace_extension(".gcda");
    if (fs::exists(gcda)) {
      argv.push_back(obj.string());
      ++with_data;
    }
  };
  for (const auto& o : app_objects_) add(o);
  for (const auto& o : test_objects_) add(o);
  if (with_data == 0) return covered;
  ProcessOptions opts;
  opts.cwd = work_dir_;
  ProcessResult r = run_process(argv, opts);
  std::istringstream lines(r.output);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] != '{') continue;
    auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.contains("files")) continue;
    for (const auto& file : doc["files"]) {
      fs::path p = file.value("file", "");
      if (p.is_relative()) p = work_dir_ / p;
      std::string rel = fs::relative(fs::weakly_canonical(p), source_root_).generic_string();
      if (!files.count(rel)) continue;
      for (const auto& l : file["lines"]) {
        if (l.value("count", 0) > 0) covered.insert(rel + ":" + std::to_string(l.value("line_number", 0)));
      }
    }
  }
  return covered;
}

std::string bundle_cmake(const Toolchain& toolchain, const InstrumentationPlan& plan,
                         const std::vector<fs::path>& include_dirs, const std::vector<const TestCase*>& suite) {
  std::string s;
  s += "cmake_minimum_required(VERSION 3.20)\n";
  s += "project(testgen_bundle LANGUAGES CXX)\n\n";
  s += "set(CMAKE_CXX_STANDARD 20)\n";
  s += "set(TESTGEN_SOURCE_ROOT \"" + plan.source_root.generic_string() + "\" CACHE PATH \"Program under test\")\n";
  s += "set(TESTGEN_INCLUDE_DIR \"" + toolchain.testgen_include.generic_string() + "\" CACHE PATH \"\")\n";
  s += "set(TESTGEN_RUNTIME_LIB \"" + toolchain.runtime_lib.generic_string() + "\" CACHE FILEPATH \"\")\n";
  s += "set(TESTGEN_TEST_MAIN_LIB \"" + toolchain.test_main_lib.generic_string() + "\" CACHE FILEPATH \"\")\n";
  s += "find_package(Threads REQUIRED)\n\n";
  auto sources = library_sources(plan);
  std::string scope = sources.empty() ? "INTERFACE" : "PUBLIC";
  s += "# lib:app\nadd_library(testgen_bundle_app " + std::string(sources.empty() ? "INTERFACE" : "STATIC") + "\n";
  for (const auto& rel : sources) s += "  ${TESTGEN_SOURCE_ROOT}/" + rel + "\n";
  s += ")\n";
  s += "target_include_directories(testgen_bundle_app " + scope + " ${TESTGEN_SOURCE_ROOT} ${TESTGEN_INCLUDE_DIR}";
  for (const auto& d : include_dirs) s += " \"" + fs::absolute(d).generic_string() + "\"";
  s += ")\n";
  s += "target_link_libraries(testgen_bundle_app " + scope +
       " ${TESTGEN_TEST_MAIN_LIB} ${TESTGEN_RUNTIME_LIB} Threads::Threads)\n\n";
  s += "enable_testing()\n";
  for (const TestCase* t : suite) {
    s += "add_executable(" + t->test_id + " " + t->source_path + ")\n";
    s += "target_link_libraries(" + t->test_id + " PRIVATE testgen_bundle_app)\n";
    s += "add_test(NAME " + t->test_id + " COMMAND " + t->test_id + ")\n";
    s += "set_tests_properties(" + t->test_id +
         " PROPERTIES ENVIRONMENT TESTGEN_RESOURCE_ROOT=${CMAKE_CURRENT_SOURCE_DIR})\n";
  }
  return s;
}

}  // namespace testgen
