#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "testgen/instrument/instrumenter.hpp"
#include "testgen/model/codec.hpp"
#include "testgen/model/errors.hpp"
#include "testgen/publish/publisher.hpp"
#include "testgen/resolve/resolver.hpp"
#include "testgen/runtime/equality.hpp"
#include "testgen/runtime/store.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace testgen;

namespace {

py::dict verdict_dict(const EqualityVerdict& v) {
  py::dict d;
  d["passed"] = v.passed;
  if (v.first_diff) {
    d["field_path"] = v.first_diff->field_path;
    d["class_name"] = v.first_diff->class_name;
    d["seen"] = v.first_diff->actual_lexeme;
    d["expected"] = v.first_diff->expected_lexeme;
  }
  return d;
}

py::dict resolve_run(const fs::path& store, const std::string& run_id) {
  Diagnostics diag;
  auto records = read_all(store, run_id, &diag);
  int depth = read_meta(store, run_id).max_depth;
  auto map = get_full_serialization_map(records, depth, &diag);
  py::list out;
  for (const auto& r : resolve_observations(records, map, &diag)) {
    py::dict d;
    d["obs_id"] = r.record.obs_id;
    d["invocation_id"] = r.record.invocation_id;
    d["method"] = r.record.method.key();
    d["kind"] = std::string(to_string(r.record.kind));
    d["param_index"] = r.record.param_index;
    d["value"] = encode_value(r.record.value);
    out.append(std::move(d));
  }
  std::vector<std::string> messages;
  for (const auto& e : diag.entries()) messages.push_back(Diagnostics::format(e));
  py::dict result;
  result["observations"] = std::move(out);
  result["diagnostics"] = std::move(messages);
  return result;
}

std::vector<std::string> select_from_pool(const std::map<std::string, std::set<std::string>>& pool) {
  std::vector<PoolEntry> entries;
  for (const auto& [id, coverage] : pool) entries.push_back(PoolEntry{id, coverage});
  return select_tests(entries);
}

std::vector<std::string> instrument(const fs::path& source_root, const fs::path& out_dir,
                                    const std::string& annotation) {
  Diagnostics diag;
  InstrumentResult r = instrument_tree(source_root, out_dir, annotation, diag);
  std::vector<std::string> keys;
  for (const auto& t : r.instrumented) keys.push_back(t.method.key());
  return keys;
}

}  // namespace

PYBIND11_MODULE(_testgen, m) {
  m.doc() = "Observation values, resolution, equality and selection from testgen";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error((std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def(
      "canonicalize", [](const std::string& doc) { return encode_value(decode_value(doc)); }, py::arg("document"),
      "Re-encode a value document in canonical form.");
  m.def(
      "common_fields_equal",
      [](const std::string& expected, const std::string& actual) {
        return verdict_dict(assert_equal_common_fields(decode_value(expected), decode_value(actual)));
      },
      py::arg("expected"), py::arg("actual"), "Compare two value documents on the fields both sides have.");
  m.def("resolve_run", &resolve_run, py::arg("store"), py::arg("run_id"),
        "Resolved observations of a stored run (values as canonical documents) and the diagnostics raised.");
  m.def("select_tests", &select_from_pool, py::arg("pool"), "Greedy coverage order over {test_id: coverage items}.");
  m.def(
      "flake_verdict", [](const std::vector<bool>& runs) { return std::string(to_string(classify(runs))); },
      py::arg("runs"), "Verdict for the outcomes of repeated runs.");
  m.def("instrument", &instrument, py::arg("source_root"), py::arg("out_dir"),
        py::arg("annotation") = std::string(kDefaultAnnotation),
        "Copy a source tree with marked functions instrumented; returns their keys.");
}
