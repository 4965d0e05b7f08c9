#include "testgen/instrument/instrumenter.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

#include "testgen/model/errors.hpp"

namespace fs = std::filesystem;

namespace testgen {

namespace {

constexpr std::string_view kHeader =
    "#include <testgen/runtime/logger.hpp> // testgen-instrumented 1.0\n#line 1\n";

bool is_header(const fs::path& p) {
  auto ext = p.extension().string();
  return ext == ".h" || ext == ".hh" || ext == ".hpp" || ext == ".hxx";
}

bool skipped_dir(const fs::path& p) {
  std::string name = p.filename().string();
  return name.empty() || name[0] == '.' || name.rfind("build", 0) == 0;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + p.string());
}

template <class F>
void walk(const fs::path& root, const fs::path& exclude, F&& visit) {
  std::vector<fs::path> found;
  fs::recursive_directory_iterator it(root), end;
  for (; it != end; ++it) {
    const fs::path& p = it->path();
    if (it->is_directory()) {
      std::error_code ec;
      if (skipped_dir(p) || (!exclude.empty() && fs::equivalent(p, exclude, ec))) it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file()) found.push_back(p);
  }
  std::sort(found.begin(), found.end());
  for (const auto& p : found) visit(p);
}

std::string c_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string location(const std::string& file, long line, long column) {
  return file + ":" + std::to_string(line) + ":" + std::to_string(column);
}

const std::set<std::string_view> kExpressionKeywords = {"return", "throw", "co_return", "co_yield", "else", "do", "case"};

struct Edit {
  std::size_t offset;
  std::size_t length;
  std::string text;
};

/// Token-level view of one target body.
class BodyScanner {
 public:
  BodyScanner(const ScanResult& scan, const Target& target) : toks_(scan.tokens), t_(target), f_(target.function) {
    find_nested_bodies();
  }

  /// Throws Error(UnsupportedConstruct).
  std::vector<ReturnSite> sites() const {
    std::vector<ReturnSite> out;
    for (std::size_t m = f_.body_open + 1; m < f_.body_close; ++m) {
      if (!significant(m) || !toks_[m].is("return") || nested(m)) continue;
      if (auto site = return_site(m)) out.push_back(*site);
    }
    return out;
  }

 private:
  bool significant(std::size_t i) const {
    auto k = toks_[i].kind;
    return k != Token::Kind::Comment && k != Token::Kind::Preprocessor;
  }

  std::size_t next_sig(std::size_t i) const {
    while (i < f_.body_close && !significant(i)) ++i;
    return i;
  }

  std::size_t prev_sig(std::size_t i) const {
    while (i > f_.body_open) {
      --i;
      if (significant(i)) return i;
    }
    return f_.body_open;
  }

  std::size_t match(std::size_t open) const {
    std::string_view o = toks_[open].text;
    std::string_view c = o == "{" ? "}" : o == "(" ? ")" : "]";
    int depth = 0;
    for (std::size_t i = open; i <= f_.body_close; ++i) {
      if (!significant(i) || toks_[i].kind != Token::Kind::Punct) continue;
      if (toks_[i].text == o) ++depth;
      if (toks_[i].text == c && --depth == 0) return i;
    }
    return f_.body_close;
  }

  [[noreturn]] void unsupported(std::size_t at, const std::string& why) const {
    throw Error(ErrorCode::UnsupportedConstruct,
                location(t_.file, toks_[at].line, toks_[at].column) + ": " + f_.name + ": " + why);
  }

  /// Lambda bodies and local class bodies; returns inside them are not ours.
  void find_nested_bodies() {
    for (std::size_t m = f_.body_open + 1; m < f_.body_close; ++m) {
      if (!significant(m)) continue;
      const Token& u = toks_[m];
      if (u.is("[")) {
        std::size_t p = prev_sig(m);
        const Token& pt = toks_[p];
        bool subscript = (pt.kind == Token::Kind::Identifier && !kExpressionKeywords.count(pt.text)) ||
                         pt.kind == Token::Kind::Number || pt.kind == Token::Kind::String ||
                         pt.kind == Token::Kind::Char || pt.is(")") || pt.is("]") || pt.is(">");
        std::size_t n = next_sig(m + 1);
        if (subscript || (n < f_.body_close && toks_[n].is("["))) continue;
        std::size_t k = match(m) + 1;
        while (k < f_.body_close) {
          if (!significant(k)) {
            ++k;
            continue;
          }
          if (toks_[k].is("(")) {
            k = match(k) + 1;
            continue;
          }
          if (toks_[k].is("{")) {
            nested_.emplace_back(k, match(k));
            break;
          }
          if (toks_[k].is(";") || toks_[k].is(")") || toks_[k].is(",") || toks_[k].is("}")) break;
          ++k;
        }
      } else if (u.is("struct") || u.is("class") || u.is("union")) {
        if (toks_[prev_sig(m)].is("enum")) continue;
        for (std::size_t k = m + 1; k < f_.body_close; ++k) {
          if (!significant(k)) continue;
          if (toks_[k].is("(")) {
            k = match(k);
            continue;
          }
          if (toks_[k].is(";") || toks_[k].is(")") || toks_[k].is(",")) break;
          if (toks_[k].is("{")) {
            nested_.emplace_back(k, match(k));
            break;
          }
        }
      }
    }
  }

  bool nested(std::size_t m) const {
    return std::any_of(nested_.begin(), nested_.end(), [m](const auto& r) { return m > r.first && m < r.second; });
  }

  std::optional<ReturnSite> return_site(std::size_t r) const {
    std::size_t e = next_sig(r + 1);
    if (e >= f_.body_close) unsupported(r, "malformed return statement");
    if (toks_[e].is(";")) return std::nullopt;
    std::size_t semi = e;
    std::size_t significant_count = 0;
    while (semi < f_.body_close) {
      if (toks_[semi].kind == Token::Kind::Preprocessor) unsupported(r, "return expression spans a preprocessor directive");
      if (significant(semi)) {
        if (toks_[semi].is(";")) break;
        ++significant_count;
        if (toks_[semi].is("(") || toks_[semi].is("[") || toks_[semi].is("{")) {
          semi = match(semi) + 1;
          continue;
        }
      }
      ++semi;
    }
    if (semi >= f_.body_close) unsupported(r, "return statement is not terminated");
    if (f_.return_type == "auto" && toks_[e].is("{")) unsupported(r, "braced return with a deduced return type");
    ReturnSite site;
    site.statement_offset = toks_[r].offset;
    site.statement_length = toks_[semi].end() - toks_[r].offset;
    site.expr_offset = toks_[e].offset;
    site.expr_length = toks_[semi].offset - toks_[e].offset;
    site.line = toks_[r].line;
    site.column = toks_[r].column;
    site.single_identifier = significant_count == 1 && toks_[e].kind == Token::Kind::Identifier;
    return site;
  }

  const std::vector<Token>& toks_;
  const Target& t_;
  const FunctionInfo& f_;
  std::vector<std::pair<std::size_t, std::size_t>> nested_;
};


class BodyRewriter {
 public:
  BodyRewriter(const std::string& source, const ScanResult& scan, const Target& target)
      : src_(source), scan_(scan), t_(target), f_(target.function) {}

  /// Appends edits for this target; throws Error(UnsupportedConstruct).
  void run(std::vector<Edit>& edits) {
    std::vector<Edit> local;
    local.push_back(Edit{scan_.tokens[f_.body_open].end(), 0, prologue()});
    if (!t_.method.is_void) {  // `return void_call();` logs nothing
      int n = 0;
      for (const auto& site : BodyScanner(scan_, t_).sites()) local.push_back(rewrite_return(site, n++));
    }
    edits.insert(edits.end(), local.begin(), local.end());
  }

 private:
  std::string prologue() const {
    const MethodId& id = t_.method;
    std::string s = " static const ::testgen::MethodId testgen_method_{" + c_string(id.file_path) + ", " +
                    c_string(id.ns) + ", " + c_string(id.container) + ", " + c_string(id.method_name) + ", " +
                    c_string(id.signature) + ", " + (id.is_void ? "true" : "false") + ", " +
                    (id.has_receiver ? "true" : "false") +
                    "}; ::testgen::ObservationLogger testgen_obs_(testgen_method_);";
    if (id.has_receiver) s += " testgen_obs_.log_receiver(*this);";
    for (std::size_t i = 0; i < f_.params.size(); ++i) {
      const ParamInfo& p = f_.params[i];
      s += " testgen_obs_.log_param(" + std::to_string(i) + ", " + p.name + ", " + std::to_string(p.line) + ", " +
           std::to_string(p.column) + ");";
    }
    return s;
  }

  Edit rewrite_return(const ReturnSite& site, int n) const {
    std::string loc = std::to_string(site.line) + ", " + std::to_string(site.column);
    std::string expr = src_.substr(site.expr_offset, site.expr_length);
    std::string tmp = "testgen_ret_" + std::to_string(n);
    std::string text;
    if (site.single_identifier) {
      // Returning the name itself keeps the implicit move of locals.
      std::string bound =
          deduced_return() ? expr : "::testgen::as_return<" + f_.return_type_text + ">(" + expr + ")";
      text = "{ const auto& " + tmp + " = " + bound + "; testgen_obs_.log_return(" + tmp + ", " + loc + "); return " +
             expr + "; }";
    } else {
      text = "{ " + f_.return_type_text + " " + tmp + " = " + expr + "; testgen_obs_.log_return(" + tmp + ", " + loc +
             "); return static_cast<decltype(" + tmp + ")&&>(" + tmp + "); }";
    }
    return Edit{site.statement_offset, site.statement_length, std::move(text)};
  }

  bool deduced_return() const {
    static const std::regex word("\\bauto\\b");
    return std::regex_search(f_.return_type, word);
  }

  const std::string& src_;
  const ScanResult& scan_;
  const Target& t_;
  const FunctionInfo& f_;
};

}  // namespace

std::vector<ReturnSite> find_return_sites(const SourceFile& file, const Target& target) {
  return BodyScanner(file.scan, target).sites();
}

namespace {

std::string declaration_of(const FunctionInfo& f) {
  std::string params;
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    if (i) params += ", ";
    params += f.params[i].type + " " + f.params[i].name;
  }
  std::string decl = f.return_type + " " + f.name + "(" + params + ");";
  if (f.container.empty()) return decl;
  return "namespace " + f.container + " { " + decl + " }";
}

}  // namespace

bool is_source_file(const fs::path& p) {
  auto ext = p.extension().string();
  return is_header(p) || ext == ".cpp" || ext == ".cc" || ext == ".cxx" || ext == ".c++";
}

const SourceFile* InstrumentationPlan::file(const std::string& rel_path) const {
  for (const auto& f : files) {
    if (f.rel_path == rel_path) return &f;
  }
  return nullptr;
}

InstrumentationPlan discover_targets(const fs::path& source_root, std::string_view annotation, Diagnostics& diagnostics) {
  InstrumentationPlan plan;
  plan.source_root = fs::weakly_canonical(source_root);
  plan.annotation = std::string(annotation);
  if (!fs::is_directory(plan.source_root)) {
    throw Error(ErrorCode::IoFailure, "source root is not a directory: " + source_root.string());
  }

  walk(plan.source_root, {}, [&](const fs::path& p) {
    if (!is_source_file(p)) return;
    SourceFile file;
    file.rel_path = fs::relative(p, plan.source_root).generic_string();
    file.text = read_file(p);
    try {
      file.scan = scan_source(file.text, annotation);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ParseFailure) throw;
      throw Error(ErrorCode::ParseFailure, file.rel_path + ": " + e.what());
    }
    for (const auto& inc : file.scan.local_includes) {
      fs::path beside = p.parent_path() / inc;
      fs::path rooted = plan.source_root / inc;
      if (fs::exists(beside)) {
        file.resolved_includes.push_back(fs::relative(fs::weakly_canonical(beside), plan.source_root).generic_string());
      } else if (fs::exists(rooted)) {
        file.resolved_includes.push_back(fs::relative(fs::weakly_canonical(rooted), plan.source_root).generic_string());
      }
    }
    plan.files.push_back(std::move(file));
  });

  for (const auto& file : plan.files) {
    for (const auto& c : file.scan.classes) {
      auto& merged = plan.classes[c.qualified_name];
      merged.qualified_name = c.qualified_name;
      merged.ns = c.ns;
      for (const auto& [name, info] : c.members) merged.members.emplace(name, info);
    }
    for (const auto& r : file.scan.registrations) {
      auto it = plan.type_index.find(r);
      if (it == plan.type_index.end() || (!is_header(it->second) && is_header(file.rel_path))) {
        plan.type_index[r] = file.rel_path;
      }
    }
  }

  for (const auto& file : plan.files) {
    for (const auto& issue : file.scan.marker_issues) {
      diagnostics.add("instrument", "UnsupportedConstruct", location(file.rel_path, issue.line, issue.column) + ": " + issue.reason);
    }
    for (const auto& fn : file.scan.functions) {
      if (!fn.marked) continue;
      FunctionInfo f = fn;
      if (!f.in_class && !f.qualifier.empty()) {
        // Out-of-class definition: the qualifier names a class or a namespace.
        std::string q = f.qualifier.rfind("::", 0) == 0 ? f.qualifier.substr(2) : f.qualifier;
        std::vector<std::string> candidates;
        std::string prefix = f.qualifier.rfind("::", 0) == 0 ? "" : f.ns;
        while (true) {
          candidates.push_back(prefix.empty() ? q : prefix + "::" + q);
          if (prefix.empty()) break;
          auto cut = prefix.rfind("::");
          prefix = cut == std::string::npos ? "" : prefix.substr(0, cut);
        }
        const ClassInfo* cls = nullptr;
        for (const auto& c : candidates) {
          auto it = plan.classes.find(c);
          if (it != plan.classes.end()) {
            cls = &it->second;
            break;
          }
        }
        if (cls) {
          f.container = cls->qualified_name;
          f.ns = cls->ns;
          auto m = cls->members.find(f.name);
          MemberInfo info = m == cls->members.end() ? MemberInfo{} : m->second;
          f.is_static = info.is_static;
          f.has_receiver = !info.is_static;
          f.access = info.access;
          if (info.access != Access::Public && !f.unsupported) f.unsupported = "non-public member functions are not supported";
        } else {
          f.container = candidates.front();
          f.ns = candidates.front();
        }
      }
      if (!f.unsupported && !f.has_receiver && !f.in_class && !is_header(file.rel_path) &&
          f.return_type == "auto") {
        f.unsupported = "deduced return types of functions defined in a source file are not supported";
      }
      if (f.unsupported) {
        diagnostics.add("instrument", "UnsupportedConstruct",
                        location(file.rel_path, f.line, f.column) + ": " + f.name + ": " + *f.unsupported);
        continue;
      }
      Target t;
      t.file = file.rel_path;
      t.function = f;
      t.method = f.method_id(file.rel_path);
      bool free_function = !f.in_class && f.container == f.ns;
      if (free_function && !is_header(file.rel_path)) t.forward_declaration = declaration_of(f);
      plan.targets.push_back(std::move(t));
    }
  }
  return plan;
}

std::string instrument_source(const SourceFile& file, const std::vector<const Target*>& targets,
                              Diagnostics& diagnostics, std::vector<const Target*>* instrumented) {
  if (file.scan.already_instrumented) {
    throw Error(ErrorCode::AlreadyInstrumented, file.rel_path + " is already instrumented");
  }
  std::vector<Edit> edits;
  for (const Target* t : targets) {
    try {
      BodyRewriter(file.text, file.scan, *t).run(edits);
      if (instrumented) instrumented->push_back(t);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnsupportedConstruct) throw;
      diagnostics.add("instrument", "UnsupportedConstruct", e.what());
    }
  }
  if (edits.empty()) return file.text;
  std::stable_sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) { return a.offset < b.offset; });
  std::string out(kHeader);
  std::size_t at = 0;
  for (const auto& e : edits) {
    out.append(file.text, at, e.offset - at);
    out += e.text;
    at = e.offset + e.length;
  }
  out.append(file.text, at, std::string::npos);
  return out;
}

InstrumentResult instrument_tree(const fs::path& source_root, const fs::path& out_dir, std::string_view annotation,
                                 Diagnostics& diagnostics) {
  InstrumentResult result;
  result.plan = discover_targets(source_root, annotation, diagnostics);
  const auto& plan = result.plan;
  for (const auto& f : plan.files) {
    if (f.scan.already_instrumented) {
      throw Error(ErrorCode::AlreadyInstrumented, f.rel_path + " is already instrumented");
    }
  }
  fs::create_directories(out_dir);
  fs::path out = fs::weakly_canonical(out_dir);
  walk(plan.source_root, out, [&](const fs::path& p) {
    fs::path dest = out / fs::relative(p, plan.source_root);
    fs::create_directories(dest.parent_path());
    fs::copy_file(p, dest, fs::copy_options::overwrite_existing);
  });
  for (const auto& file : plan.files) {
    std::vector<const Target*> mine;
    for (const auto& t : plan.targets) {
      if (t.file == file.rel_path) mine.push_back(&t);
    }
    if (mine.empty()) continue;
    std::vector<const Target*> done;
    std::string text = instrument_source(file, mine, diagnostics, &done);
    for (const Target* t : done) result.instrumented.push_back(*t);
    write_file(out / file.rel_path, text);
  }
  return result;
}

}  // namespace testgen
