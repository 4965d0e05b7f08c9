#include "testgen/gen/generator.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "testgen/model/errors.hpp"
#include "testgen/runtime/generated_test.hpp"

namespace testgen {

std::string sanitize_identifier(const std::string& text) {
  std::string out;
  for (char c : text) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    out += ok ? c : '_';
  }
  if (out.empty() || (out[0] >= '0' && out[0] <= '9')) out.insert(out.begin(), '_');
  return out;
}

std::string normalize_type_name(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (c != ' ' && c != '\t' && c != '\n') out += c;
  }
  if (out.rfind("::", 0) == 0) out.erase(0, 2);
  return out;
}

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void collect_classes(const ObservedValue& v, std::set<std::string>& out) {
  if (const auto* o = std::get_if<ObjectValue>(&v.node)) {
    if (!o->class_name.empty()) out.insert(normalize_type_name(o->class_name));
    for (const auto& f : o->fields) collect_classes(f.value, out);
  } else if (const auto* s = std::get_if<Sequence>(&v.node)) {
    for (const auto& item : s->items) collect_classes(item, out);
  }
}

std::string c_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

bool is_header_path(const std::string& p) {
  for (const char* ext : {".h", ".hh", ".hpp", ".hxx"}) {
    std::string e = ext;
    if (p.size() > e.size() && p.compare(p.size() - e.size(), e.size(), e) == 0) return true;
  }
  return false;
}

const Target* find_target(const InstrumentationPlan& plan, const MethodId& m) {
  for (const auto& t : plan.targets) {
    if (t.method == m) return &t;
  }
  for (const auto& t : plan.targets) {
    if (t.method.key() == m.key()) return &t;
  }
  return nullptr;
}

}  // namespace

std::vector<InvocationGroup> group_invocations(const std::vector<ResolvedObservation>& resolved, Diagnostics* diagnostics) {
  std::map<std::string, InvocationGroup> by_id;
  std::map<std::string, std::string> problems;
  for (const auto& r : resolved) {
    const ObservationRecord& rec = r.record;
    std::string key = rec.invocation_id.empty() ? "seq-" + std::to_string(rec.seq_nr) : rec.invocation_id;
    auto [it, fresh] = by_id.try_emplace(key);
    InvocationGroup& g = it->second;
    if (fresh) {
      g.method = rec.method;
      g.invocation_id = key;
      g.first_seq = rec.seq_nr;
    }
    g.first_seq = std::min(g.first_seq, rec.seq_nr);
    if (!(g.method == rec.method)) {
      problems.emplace(key, "records of one invocation name different methods");
      continue;
    }
    switch (rec.kind) {
      case ObsKind::CurrentObjInst:
        if (g.receiver) problems.emplace(key, "duplicate receiver");
        g.receiver = rec;
        break;
      case ObsKind::Parameter:
        g.params.push_back(rec);
        break;
      case ObsKind::Return:
        if (g.ret) problems.emplace(key, "duplicate return");
        g.ret = rec;
        break;
    }
  }

  std::vector<InvocationGroup> out;
  for (auto& [key, g] : by_id) {
    auto report = [&, &key = key, &g = g](const std::string& why) {
      if (diagnostics) {
        diagnostics->add("testgen", "IncompleteInvocation", g.method.key() + " invocation " + key + ": " + why);
      }
    };
    if (auto p = problems.find(key); p != problems.end()) {
      report(p->second);
      continue;
    }
    std::size_t arity = g.method.parameter_types().size();
    std::vector<std::optional<ObservationRecord>> slots(arity);
    std::string why;
    for (auto& rec : g.params) {
      int i = rec.param_index.value_or(-1);
      if (i < 0 || static_cast<std::size_t>(i) >= arity) {
        why = "parameter index out of range";
      } else if (slots[i]) {
        why = "duplicate parameter " + std::to_string(i);
      } else {
        slots[i] = std::move(rec);
      }
    }
    for (std::size_t i = 0; i < arity && why.empty(); ++i) {
      if (!slots[i]) why = "missing parameter " + std::to_string(i);
    }
    if (why.empty() && g.method.has_receiver && !g.receiver) why = "missing receiver";
    if (why.empty() && !g.method.is_void && !g.ret) why = "missing return";
    if (!why.empty()) {
      report(why);
      continue;
    }
    g.params.clear();
    for (auto& s : slots) g.params.push_back(std::move(*s));
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(), [](const InvocationGroup& a, const InvocationGroup& b) {
    return a.first_seq < b.first_seq;
  });
  return out;
}

TestCase generate_test(const InvocationGroup& group, const GeneratorContext& context) {
  if (!context.plan) throw Error(ErrorCode::PreconditionViolation, "generator needs an instrumentation plan");
  const InstrumentationPlan& plan = *context.plan;
  const MethodId& m = group.method;
  const Target* target = find_target(plan, m);
  if (!target) throw Error(ErrorCode::PreconditionViolation, m.key() + " is not a discovered target");

  std::map<std::string, std::string> index;
  for (const auto& [name, provider] : plan.type_index) index[normalize_type_name(name)] = provider;

  TestCase tc;
  tc.method = m;
  tc.target_file = target->file;

  auto unsupported = [&](const std::string& why) { throw Error(ErrorCode::UnsupportedType, m.key() + ": " + why); };
  if (m.has_receiver) {
    if (!index.count(normalize_type_name(m.container))) unsupported("receiver class " + m.container + " is not registered");
    tc.observed_types.insert(normalize_type_name(m.container));
  }

  auto add_resource = [&](const ObservationRecord& rec) {
    if (rec.value.is<DepthTruncated>()) {
      unsupported(std::string(to_string(rec.kind)) + (rec.param_index ? " " + std::to_string(*rec.param_index) : "") +
                  " was not serializable");
    }
    collect_classes(rec.value, tc.observed_types);
    ResourceFile f;
    f.rel_path = "resources/" + rec.obs_id + ".obs";
    f.content = gen::resource_text(rec.value, context.max_depth);
    tc.resources.push_back(f);
    return f.rel_path;
  };
  if (group.receiver) tc.receiver_resource = add_resource(*group.receiver);
  for (const auto& p : group.params) tc.param_resources.push_back(add_resource(p));
  if (!m.is_void && group.ret) tc.return_resource = add_resource(*group.ret);
  for (const auto& t : tc.observed_types) {
    if (!index.count(t)) unsupported("class " + t + " is not registered");
  }

  std::uint64_t h = fnv1a(m.key());
  for (const auto& r : tc.resources) h = fnv1a(r.content, fnv1a(std::string_view("\0", 1), h));
  tc.content_hash = hex(h);
  tc.test_id = "t" + tc.content_hash;
  std::string container_dir = m.container.empty() ? "global" : sanitize_identifier(m.container);
  tc.source_path = "tests/" + container_dir + "/" + m.method_name + "_" + tc.test_id + ".cpp";
  tc.regen_command = context.regen_command;
  tc.run_command = "ctest -R '^" + tc.test_id + "$'";

  std::set<std::string> includes;
  if (is_header_path(target->file)) {
    includes.insert(target->file);
  } else if (const SourceFile* sf = plan.file(target->file)) {
    includes.insert(sf->resolved_includes.begin(), sf->resolved_includes.end());
  }
  for (const auto& t : tc.observed_types) {
    const std::string& provider = index.at(t);
    if (is_header_path(provider)) includes.insert(provider);
  }
  tc.includes.assign(includes.begin(), includes.end());

  // Source text.
  const auto params = m.parameter_types();
  std::string s;
  s += "// test for " + (m.container.empty() ? "" : m.container + "::") + m.method_name + " " + tc.test_id + "\n";
  s += "// Generated by testgen from run " + context.run_id + ".\n";
  s += "#include <testgen/runtime/generated_test.hpp>\n\n";
  for (const auto& inc : tc.includes) s += "#include " + c_string(inc) + "\n";
  if (!tc.includes.empty()) s += "\n";
  if (!target->forward_declaration.empty()) s += target->forward_declaration + "\n\n";
  if (!m.ns.empty()) s += "namespace " + m.ns + " {\n\n";
  s += "static const ::testgen::gen::TestInfo testgen_info_" + tc.test_id + "{" + c_string(tc.test_id) + ", " +
       c_string(tc.regen_command) + ", " + c_string(tc.run_command) + ", " + c_string(tc.source_path) + "};\n\n";
  s += "TESTGEN_TEST(testgen_" + tc.test_id + ") {\n";
  s += "  if (::testgen::gen::killswitched()) {\n    return;\n  }\n";
  std::string callee;
  if (m.has_receiver) {
    s += "  ::" + m.container + " receiver{};\n";
    s += "  ::testgen::gen::initialize_observation(receiver, " + c_string(*tc.receiver_resource) + ");\n";
    callee = "receiver." + m.method_name;
  } else {
    callee = "::" + (m.container.empty() ? "" : m.container + "::") + m.method_name;
  }
  std::string args;
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::string var = "p" + std::to_string(i);
    s += "  std::remove_cvref_t<" + params[i] + "> " + var + "{};\n";
    s += "  ::testgen::gen::initialize_observation(" + var + ", " + c_string(tc.param_resources[i]) + ");\n";
    if (i) args += ", ";
    args += "std::forward<" + params[i] + ">(" + var + ")";
  }
  if (m.is_void) {
    s += "  " + callee + "(" + args + ");\n";
  } else {
    s += "  auto&& actual = " + callee + "(" + args + ");\n";
    s += "  ::testgen::gen::assert_equal(" + c_string(*tc.return_resource) + ", actual, testgen_info_" + tc.test_id +
         ");\n";
  }
  s += "}\n";
  if (!m.ns.empty()) s += "\n}  // namespace " + m.ns + "\n";
  tc.source_text = std::move(s);
  return tc;
}

std::vector<TestCase> generate_tests(const std::vector<InvocationGroup>& groups, const GeneratorContext& context,
                                     Diagnostics* diagnostics, std::size_t* deduplicated) {
  std::vector<TestCase> out;
  std::set<std::string> hashes;
  std::size_t dups = 0;
  for (const auto& g : groups) {
    try {
      TestCase tc = generate_test(g, context);
      if (!hashes.insert(tc.content_hash).second) {
        ++dups;
        continue;
      }
      out.push_back(std::move(tc));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnsupportedType && e.code() != ErrorCode::PreconditionViolation) throw;
      if (diagnostics) diagnostics->add("testgen", std::string(to_string(e.code())), e.what());
    }
  }
  if (deduplicated) *deduplicated = dups;
  return out;
}

}  // namespace testgen
