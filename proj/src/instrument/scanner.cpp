#include "testgen/instrument/scanner.hpp"

#include <algorithm>
#include <set>

#include "testgen/model/errors.hpp"

namespace testgen {

std::string canonical_text(const std::vector<Token>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  const Token* prev = nullptr;
  for (std::size_t i = begin; i < end; ++i) {
    const Token& t = tokens[i];
    if (t.kind == Token::Kind::Comment || t.kind == Token::Kind::Preprocessor) continue;
    if (prev && prev->is_word() && t.is_word()) out += ' ';
    out += t.text;
    prev = &t;
  }
  return out;
}

std::string FunctionInfo::signature() const {
  std::string sig = "(";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) sig += ',';
    sig += params[i].type;
  }
  return sig + ")->" + return_type;
}

MethodId FunctionInfo::method_id(const std::string& file_path) const {
  return MethodId{file_path, ns, container, name, signature(), return_type == "void", has_receiver};
}

namespace {

const std::set<std::string_view> kTypeWords = {
    "int",    "long",   "short",   "char",     "bool",     "float",    "double", "unsigned", "signed",
    "void",   "auto",   "const",   "volatile", "wchar_t",  "char8_t",  "char16_t", "char32_t", "struct",
    "class",  "typename", "enum",  "union"};

const std::set<std::string_view> kNotAName = {"decltype", "alignas", "__attribute__", "noexcept", "sizeof",
                                               "alignof",  "typeof",  "__typeof__",    "throw",    "__declspec",
                                               "requires", "static_assert"};

struct Scope {
  enum class Kind { Namespace, Class, Extern };
  Kind kind;
  std::string name;
  bool anonymous = false;
  bool templated = false;
  Access access = Access::Public;
  std::size_t class_index = 0;
};

class Scanner {
 public:
  Scanner(std::string_view source, std::string_view annotation, ScanResult& out)
      : annotation_(annotation), out_(out) {
    out_.tokens = lex(source);
  }

  void run() {
    std::size_t i = 0;
    while (i < toks().size()) i = statement(i);
    if (scopes_.size() > 0) fail("unbalanced braces: scope opened here is never closed", scope_lines_.back());
  }

 private:
  const std::vector<Token>& toks() const { return out_.tokens; }
  const Token& tok(std::size_t i) const { return out_.tokens[i]; }
  std::size_t size() const { return out_.tokens.size(); }

  [[noreturn]] void fail(const std::string& what, long line) const {
    throw Error(ErrorCode::ParseFailure, "line " + std::to_string(line) + ": " + what);
  }

  bool significant(std::size_t i) const {
    auto k = tok(i).kind;
    return k != Token::Kind::Comment && k != Token::Kind::Preprocessor;
  }

  std::size_t next_sig(std::size_t i) const {
    while (i < size() && !significant(i)) ++i;
    return i;
  }

  bool is_marker(const Token& t) const {
    return t.kind == Token::Kind::Comment && t.text.find("@" + std::string(annotation_)) != std::string_view::npos;
  }

  void note_trivia(std::size_t i) {
    const Token& t = tok(i);
    if (t.kind == Token::Kind::Comment) {
      if (is_marker(t)) pending_marker_ = i;
      if (t.text.find(kInstrumentedMarker) != std::string_view::npos) out_.already_instrumented = true;
      return;
    }
    // Preprocessor line.
    if (t.text.find(kInstrumentedMarker) != std::string_view::npos) out_.already_instrumented = true;
    std::string_view d = t.text.substr(1);
    while (!d.empty() && (d.front() == ' ' || d.front() == '\t')) d.remove_prefix(1);
    if (d.rfind("include", 0) == 0) {
      auto q1 = d.find('"');
      if (q1 != std::string_view::npos) {
        auto q2 = d.find('"', q1 + 1);
        if (q2 != std::string_view::npos) out_.local_includes.emplace_back(d.substr(q1 + 1, q2 - q1 - 1));
      }
    }
  }

  /// Index of the token closing the bracket opened at `open`.
  std::size_t match(std::size_t open) const {
    std::string_view o = tok(open).text;
    std::string_view c = o == "{" ? "}" : o == "(" ? ")" : o == "[" ? "]" : ">";
    int depth = 0;
    for (std::size_t i = open; i < size(); ++i) {
      if (!significant(i) || tok(i).kind != Token::Kind::Punct) continue;
      if (tok(i).text == o) ++depth;
      if (tok(i).text == c && --depth == 0) return i;
    }
    fail("unbalanced '" + std::string(o) + "'", tok(open).line);
  }

  /// Skips to just past the next ';' at bracket depth 0.
  std::size_t skip_to_semicolon(std::size_t i) const {
    while (i < size()) {
      if (significant(i) && tok(i).kind == Token::Kind::Punct) {
        std::string_view t = tok(i).text;
        if (t == ";") return i + 1;
        if (t == "{" || t == "(" || t == "[") {
          i = match(i) + 1;
          continue;
        }
        if (t == "}") return i;  // leave the closer to the enclosing scope
      }
      ++i;
    }
    return i;
  }

  std::string namespace_name() const {
    std::string out;
    for (const auto& s : scopes_) {
      if (s.kind != Scope::Kind::Namespace || s.anonymous) continue;
      if (!out.empty()) out += "::";
      out += s.name;
    }
    return out;
  }

  std::string qualified_scope() const {
    std::string out;
    for (const auto& s : scopes_) {
      if (s.kind == Scope::Kind::Extern || s.anonymous) continue;
      if (!out.empty()) out += "::";
      out += s.name;
    }
    return out;
  }

  bool in_anonymous_namespace() const {
    return std::any_of(scopes_.begin(), scopes_.end(), [](const Scope& s) { return s.anonymous && s.kind == Scope::Kind::Namespace; });
  }

  Scope* class_scope() { return !scopes_.empty() && scopes_.back().kind == Scope::Kind::Class ? &scopes_.back() : nullptr; }

  void marker_issue(const std::string& reason) {
    if (!pending_marker_) return;
    const Token& m = tok(*pending_marker_);
    out_.marker_issues.push_back(MarkerIssue{m.line, m.column, reason});
    pending_marker_.reset();
  }

  std::size_t statement(std::size_t i) {
    if (!significant(i)) {
      note_trivia(i);
      return i + 1;
    }
    const Token& t = tok(i);
    if (t.is("}")) {
      if (scopes_.empty()) fail("unmatched '}'", t.line);
      Scope closed = scopes_.back();
      scopes_.pop_back();
      scope_lines_.pop_back();
      marker_issue("marker is not attached to a function definition");
      if (closed.kind == Scope::Kind::Class) return skip_to_semicolon(i + 1);
      return i + 1;
    }
    if (t.is(";")) return i + 1;
    if (Scope* cs = class_scope()) {
      std::size_t n = next_sig(i + 1);
      if ((t.is("public") || t.is("protected") || t.is("private")) && n < size() && tok(n).is(":")) {
        cs->access = t.is("public") ? Access::Public : t.is("protected") ? Access::Protected : Access::Private;
        return n + 1;
      }
    }
    if (t.is("TESTGEN_REFLECT") || t.is("TESTGEN_FRIEND")) {
      std::size_t open = next_sig(i + 1);
      if (open >= size() || !tok(open).is("(")) return i + 1;
      std::size_t close = match(open);
      if (t.is("TESTGEN_REFLECT")) out_.registrations.push_back(first_argument(open + 1, close));
      std::size_t after = next_sig(close + 1);
      return (after < size() && tok(after).is(";")) ? after + 1 : close + 1;
    }

    // Gather one declaration up to ';' or '{' outside parentheses.
    std::vector<std::size_t> g;
    std::size_t j = i;
    while (j < size()) {
      if (!significant(j)) {
        ++j;
        continue;
      }
      const Token& u = tok(j);
      if (u.is(";") || u.is("{")) break;
      if (u.is("}")) fail("unexpected '}'", u.line);
      if (u.is("(") || u.is("[")) {
        std::size_t close = match(j);
        for (std::size_t k = j; k <= close; ++k) {
          if (significant(k)) g.push_back(k);
        }
        j = close + 1;
        continue;
      }
      g.push_back(j);
      ++j;
    }
    if (j >= size()) {
      if (g.empty()) return j;
      fail("declaration is not terminated", tok(g.front()).line);
    }
    if (tok(j).is(";")) {
      record_member_declaration(g);
      marker_issue("marker is on a declaration without a body");
      return j + 1;
    }
    return open_brace(g, j);
  }

  std::string first_argument(std::size_t begin, std::size_t end) const {
    int angle = 0, paren = 0;
    std::size_t k = begin;
    for (; k < end; ++k) {
      const Token& u = tok(k);
      if (u.is("<")) ++angle;
      if (u.is(">")) --angle;
      if (u.is("(")) ++paren;
      if (u.is(")")) --paren;
      if (u.is(",") && angle == 0 && paren == 0) break;
    }
    return normalize_class_name(canonical_text(toks(), begin, k));
  }

  static std::string normalize_class_name(std::string name) {
    if (name.rfind("::", 0) == 0) name.erase(0, 2);
    return name;
  }

  bool has_word(const std::vector<std::size_t>& g, std::string_view w) const {
    return std::any_of(g.begin(), g.end(), [&](std::size_t k) { return tok(k).is(w); });
  }

  /// An `=` outside brackets that is not part of an operator name or `==`.
  bool initializer(const std::vector<std::size_t>& g) const {
    int depth = 0;
    for (std::size_t m = 0; m < g.size(); ++m) {
      const Token& u = tok(g[m]);
      if (u.is("(") || u.is("[")) ++depth;
      if (u.is(")") || u.is("]")) --depth;
      if (depth != 0 || !u.is("=")) continue;
      bool joined_before = m > 0 && tok(g[m - 1]).end() == u.offset && tok(g[m - 1]).kind == Token::Kind::Punct &&
                           !tok(g[m - 1]).is(")") && !tok(g[m - 1]).is("]");
      bool joined_after = m + 1 < g.size() && tok(g[m + 1]).offset == u.end() && tok(g[m + 1]).is("=");
      bool after_operator = m > 0 && tok(g[m - 1]).is("operator");
      if (!joined_before && !joined_after && !after_operator) return true;
    }
    return false;
  }

  bool top_level_paren(const std::vector<std::size_t>& g) const {
    return std::any_of(g.begin(), g.end(), [&](std::size_t k) { return tok(k).is("("); });
  }

  std::size_t open_brace(const std::vector<std::size_t>& g, std::size_t brace) {
    std::size_t k = 0;
    while (k < g.size() && (tok(g[k]).is("inline") || tok(g[k]).is("export"))) ++k;
    if (k < g.size() && tok(g[k]).is("namespace")) {
      Scope s{Scope::Kind::Namespace, {}};
      for (std::size_t m = k + 1; m < g.size(); ++m) {
        if (tok(g[m]).kind == Token::Kind::Identifier) {
          if (!s.name.empty()) s.name += "::";
          s.name += tok(g[m]).text;
        }
      }
      s.anonymous = s.name.empty();
      push(std::move(s), brace);
      marker_issue("marker is not attached to a function definition");
      return brace + 1;
    }
    if (!g.empty() && tok(g[0]).is("extern") && g.size() == 2 && tok(g[1]).kind == Token::Kind::String) {
      push(Scope{Scope::Kind::Extern, {}}, brace);
      return brace + 1;
    }

    bool templated = !g.empty() && tok(g[0]).is("template");
    std::size_t start = 0;
    if (templated) start = skip_template_header(g, 0);
    std::size_t key = start;
    while (key < g.size() && (tok(g[key]).is("typedef") || tok(g[key]).is("[") || tok(g[key]).is("alignas"))) ++key;
    if (key < g.size() && (tok(g[key]).is("enum"))) {
      marker_issue("marker is not attached to a function definition");
      return skip_to_semicolon(match(brace) + 1);
    }
    bool has_eq = initializer(g);
    if (key < g.size() && (tok(g[key]).is("class") || tok(g[key]).is("struct") || tok(g[key]).is("union")) &&
        !top_level_paren_outside_bases(g, key) && !has_eq) {
      Scope s{Scope::Kind::Class, class_name(g, key)};
      s.anonymous = s.name.empty();
      s.templated = templated || std::any_of(scopes_.begin(), scopes_.end(), [](const Scope& p) { return p.templated; });
      s.access = tok(g[key]).is("class") ? Access::Private : Access::Public;
      ClassInfo info;
      info.ns = namespace_name();
      std::string outer = qualified_scope();
      info.qualified_name = outer.empty() ? s.name : outer + "::" + s.name;
      s.class_index = out_.classes.size();
      out_.classes.push_back(std::move(info));
      push(std::move(s), brace);
      marker_issue("marker is not attached to a function definition");
      return brace + 1;
    }
    if (has_eq || !top_level_paren(g)) {
      if (has_eq && has_word(g, "[")) {
        marker_issue("anonymous functions (lambdas) are not supported");
      } else {
        marker_issue("marker is not attached to a function definition");
      }
      return skip_to_semicolon(match(brace) + 1);
    }
    return function_definition(g, brace, templated);
  }

  bool top_level_paren_outside_bases(const std::vector<std::size_t>& g, std::size_t key) const {
    for (std::size_t m = key; m < g.size(); ++m) {
      if (tok(g[m]).is(":")) return false;
      if (tok(g[m]).is("(")) {
        // alignas(...) and attribute arguments are fine.
        if (m > 0 && (tok(g[m - 1]).is("alignas") || tok(g[m - 1]).is("__attribute__"))) continue;
        return true;
      }
    }
    return false;
  }

  std::string class_name(const std::vector<std::size_t>& g, std::size_t key) const {
    std::string name;
    for (std::size_t m = key + 1; m < g.size(); ++m) {
      const Token& u = tok(g[m]);
      if (u.is(":") || u.is("final")) break;
      if (u.is("[") || u.is("(")) {
        continue;
      }
      if (u.kind == Token::Kind::Identifier && !u.is("alignas") && !u.is("__attribute__")) name = std::string(u.text);
    }
    return name;
  }

  std::size_t skip_template_header(const std::vector<std::size_t>& g, std::size_t k) const {
    while (k < g.size() && tok(g[k]).is("template")) {
      ++k;
      if (k < g.size() && tok(g[k]).is("<")) {
        int depth = 0;
        for (; k < g.size(); ++k) {
          if (tok(g[k]).is("<")) ++depth;
          if (tok(g[k]).is(">") && --depth == 0) {
            ++k;
            break;
          }
        }
      }
    }
    return k;
  }

  void push(Scope s, std::size_t brace) {
    scopes_.push_back(std::move(s));
    scope_lines_.push_back(tok(brace).line);
  }

  struct Header {
    std::size_t name_pos = 0;  // index into g
    std::size_t open = 0;      // index into g of '('
    std::size_t close = 0;     // index into g of ')'
    std::size_t type_begin = 0;
    std::size_t qual_begin = 0;
    bool is_static = false, is_friend = false, is_constexpr = false, is_operator = false, is_destructor = false;
    bool found = false;
  };

  Header parse_header(const std::vector<std::size_t>& g, std::size_t start) const {
    Header h;
    std::size_t k = start;
    while (k < g.size()) {
      const Token& u = tok(g[k]);
      if (u.is("static")) {
        h.is_static = true;
      } else if (u.is("friend")) {
        h.is_friend = true;
      } else if (u.is("constexpr") || u.is("consteval") || u.is("constinit")) {
        h.is_constexpr = true;
      } else if (u.is("[") && k + 1 < g.size() && tok(g[k + 1]).is("[")) {
        int depth = 0;
        for (; k < g.size(); ++k) {
          if (tok(g[k]).is("[")) ++depth;
          if (tok(g[k]).is("]") && --depth == 0) break;
        }
      } else if (u.is("__attribute__") || u.is("alignas") || u.is("__declspec")) {
        ++k;
        int depth = 0;
        for (; k < g.size(); ++k) {
          if (tok(g[k]).is("(")) ++depth;
          if (tok(g[k]).is(")") && --depth == 0) break;
        }
      } else if (!(u.is("inline") || u.is("virtual") || u.is("explicit") || u.is("extern"))) {
        break;
      }
      ++k;
    }
    h.type_begin = k;
    int angle = 0;
    for (std::size_t m = k; m < g.size(); ++m) {
      const Token& u = tok(g[m]);
      if (u.is("operator") && !h.found) {
        h.is_operator = true;
        std::size_t open = m + 1;
        if (open + 1 < g.size() && tok(g[open]).is("(") && tok(g[open + 1]).is(")")) open += 2;
        while (open < g.size() && !tok(g[open]).is("(")) ++open;
        if (open >= g.size()) return h;
        std::size_t close = open;
        int depth = 0;
        for (; close < g.size(); ++close) {
          if (tok(g[close]).is("(")) ++depth;
          if (tok(g[close]).is(")") && --depth == 0) break;
        }
        h.found = true;
        h.name_pos = m;
        h.open = open;
        h.close = close;
        m = close;
        continue;
      }
      if (u.is("<")) ++angle;
      if (u.is(">") && angle > 0) --angle;
      if (u.is("(")) {
        std::size_t close = m;
        int depth = 0;
        for (; close < g.size(); ++close) {
          if (tok(g[close]).is("(")) ++depth;
          if (tok(g[close]).is(")") && --depth == 0) break;
        }
        if (angle == 0 && m > k && tok(g[m - 1]).kind == Token::Kind::Identifier &&
            !kNotAName.count(tok(g[m - 1]).text) && !h.found) {
          h.found = true;
          h.name_pos = m - 1;
          h.open = m;
          h.close = close;
        }
        m = close;
      }
    }
    if (!h.found) return h;
    std::size_t q = h.name_pos;
    if (q > 0 && tok(g[q - 1]).is("~")) {
      h.is_destructor = true;
      --q;
    }
    while (q >= 2 && tok(g[q - 1]).is("::") &&
           (tok(g[q - 2]).kind == Token::Kind::Identifier || tok(g[q - 2]).is(">"))) {
      if (tok(g[q - 2]).is(">")) {
        int depth = 0;
        std::size_t r = q - 2;
        for (;; --r) {
          if (tok(g[r]).is(">")) ++depth;
          if (tok(g[r]).is("<") && --depth == 0) break;
          if (r == 0) break;
        }
        q = r > 0 ? r - 1 : 0;
        if (tok(g[q]).kind != Token::Kind::Identifier) break;
      } else {
        q -= 2;
      }
    }
    if (q >= 1 && tok(g[q - 1]).is("::") && (q == 1 || tok(g[q - 2]).kind != Token::Kind::Identifier)) --q;
    h.qual_begin = q;
    return h;
  }

  std::string text_of(const std::vector<std::size_t>& g, std::size_t begin, std::size_t end) const {
    if (begin >= end) return {};
    return canonical_text(toks(), g[begin], g[end - 1] + 1);
  }

  /// Tokens as written, with comments dropped and runs of whitespace collapsed.
  std::string raw_of(const std::vector<std::size_t>& g, std::size_t begin, std::size_t end) const {
    std::string out;
    const Token* prev = nullptr;
    for (std::size_t m = begin; m < end; ++m) {
      const Token& u = tok(g[m]);
      if (prev && prev->end() != u.offset) out += ' ';
      out += u.text;
      prev = &u;
    }
    return out;
  }

  void record_member_declaration(const std::vector<std::size_t>& g) {
    Scope* cs = class_scope();
    if (!cs || g.empty() || !top_level_paren(g)) return;
    std::size_t start = tok(g[0]).is("template") ? skip_template_header(g, 0) : 0;
    Header h = parse_header(g, start);
    if (!h.found) return;
    auto& info = out_.classes[cs->class_index];
    info.members[std::string(tok(g[h.name_pos]).text)] = MemberInfo{h.is_static, cs->access};
  }

  std::size_t function_definition(const std::vector<std::size_t>& g, std::size_t brace, bool templated) {
    FunctionInfo f;
    f.body_open = brace;
    f.body_close = match(brace);
    std::size_t after = f.body_close + 1;
    if (pending_marker_) {
      f.marked = true;
      pending_marker_.reset();
    }

    std::size_t start = templated ? skip_template_header(g, 0) : 0;
    Header h = parse_header(g, start);
    Scope* cs = class_scope();
    auto unsupported = [&](std::string reason) {
      if (!f.unsupported) f.unsupported = std::move(reason);
    };

    // Body checks: nested markers, coroutines, function-try-blocks.
    for (std::size_t m = brace + 1; m < f.body_close; ++m) {
      const Token& u = tok(m);
      if (is_marker(u)) out_.marker_issues.push_back(MarkerIssue{u.line, u.column, "local or anonymous functions are not supported"});
      if (u.is("co_return") || u.is("co_await") || u.is("co_yield")) unsupported("coroutines are not supported");
    }
    if (!g.empty() && tok(g.back()).is("try")) {
      unsupported("function-try-blocks are not supported");
      std::size_t n = next_sig(after);
      while (n < size() && tok(n).is("catch")) {
        std::size_t open = next_sig(n + 1);
        std::size_t body = next_sig(match(open) + 1);
        after = match(body) + 1;
        n = next_sig(after);
      }
    }

    if (!h.found) {
      if (f.marked) out_.marker_issues.push_back(MarkerIssue{tok(g.front()).line, tok(g.front()).column, "cannot parse the function header"});
      return after;
    }
    const Token& name_tok = tok(g[h.name_pos]);
    f.name = std::string(name_tok.text);
    f.line = name_tok.line;
    f.column = name_tok.column;
    f.ns = namespace_name();
    f.in_class = cs != nullptr;
    f.is_static = h.is_static;

    std::size_t qual_end = h.name_pos - (h.is_destructor ? 1 : 0);
    if (h.qual_begin < qual_end) {
      // Drop the trailing "::" before the name.
      f.qualifier = text_of(g, h.qual_begin, qual_end - 1);
    }

    // Return type, possibly trailing.
    std::string ret_text = raw_of(g, h.type_begin, h.qual_begin);
    std::string ret_canon = text_of(g, h.type_begin, h.qual_begin);
    bool is_const = false;
    for (std::size_t m = h.close + 1; m < g.size(); ++m) {
      const Token& u = tok(g[m]);
      if (u.is("const")) {
        is_const = true;
      } else if (u.is("->")) {
        std::size_t end = m + 1;
        while (end < g.size() && !tok(g[end]).is("override") && !tok(g[end]).is("final") &&
               !tok(g[end]).is("requires") && !tok(g[end]).is("try")) {
          ++end;
        }
        ret_text = raw_of(g, m + 1, end);
        ret_canon = text_of(g, m + 1, end);
        m = end - 1;
      } else if (u.is("requires")) {
        unsupported("constrained functions are not supported");
        break;
      } else if (u.is(":")) {
        unsupported("constructors are not supported");
        break;
      }
    }
    (void)is_const;
    f.return_type = ret_canon;
    f.return_type_text = ret_text;

    if (templated || (cs && cs->templated)) unsupported("templates are not supported");
    if (h.is_operator) unsupported("operators are not supported");
    if (h.is_destructor) unsupported("destructors are not supported");
    if (h.is_friend) unsupported("friend functions are not supported");
    if (h.is_constexpr) unsupported("constexpr functions are not supported");
    if (ret_canon.empty()) unsupported("constructors are not supported");
    if (ret_canon.find("decltype(auto)") != std::string::npos) unsupported("decltype(auto) returns are not supported");
    if (in_anonymous_namespace() || (cs && cs->anonymous)) unsupported("functions in anonymous namespaces or classes are not supported");
    if (!cs && h.is_static && f.qualifier.empty()) unsupported("static (internal linkage) functions are not supported");
    if (f.qualifier.find('<') != std::string::npos) unsupported("members of class templates are not supported");
    if (cs) {
      f.container = out_.classes[cs->class_index].qualified_name;
      f.access = cs->access;
      f.has_receiver = !h.is_static;
      out_.classes[cs->class_index].members[f.name] = MemberInfo{h.is_static, cs->access};
      if (cs->access != Access::Public) unsupported("non-public member functions are not supported");
    } else {
      f.container = f.ns;
    }
    if (!cs && f.qualifier.empty() && f.ns.empty() && f.name == "main" && !in_anonymous_namespace()) {
      out_.has_main = true;
      unsupported("main cannot be a target");
    }

    parse_params(g, h, f, unsupported);
    out_.functions.push_back(std::move(f));
    return after;
  }

  template <class U>
  void parse_params(const std::vector<std::size_t>& g, const Header& h, FunctionInfo& f, U&& unsupported) {
    std::vector<std::vector<std::size_t>> params(1);
    int depth = 0, angle = 0;
    bool in_default = false;
    for (std::size_t m = h.open + 1; m < h.close; ++m) {
      const Token& u = tok(g[m]);
      if (u.is("(") || u.is("[") || u.is("{")) ++depth;
      if (u.is(")") || u.is("]") || u.is("}")) --depth;
      if (!in_default && u.is("<")) ++angle;
      if (!in_default && u.is(">") && angle > 0) --angle;
      if (depth == 0 && angle == 0 && u.is("=")) in_default = true;
      if (depth == 0 && angle == 0 && u.is(",")) {
        params.emplace_back();
        in_default = false;
        continue;
      }
      if (!in_default) params.back().push_back(m);
    }
    if (h.close > h.open + 1) f.parameter_text = raw_of(g, h.open + 1, h.close);
    if (params.size() == 1 && params[0].empty()) return;
    if (params.size() == 1 && params[0].size() == 1 && tok(g[params[0][0]]).is("void")) return;
    for (const auto& p : params) {
      if (p.empty()) {
        unsupported("cannot parse a parameter");
        return;
      }
      bool fn_or_array = false;
      for (std::size_t m : p) {
        const Token& u = tok(g[m]);
        if (u.is("...")) {
          unsupported("variadic functions are not supported");
          return;
        }
        if (u.is(".")) {
          unsupported("variadic functions are not supported");
          return;
        }
        if (u.is("(") || u.is("[")) fn_or_array = true;
      }
      if (fn_or_array) {
        unsupported("function-pointer and array parameters are not supported");
        return;
      }
      const Token& last = tok(g[p.back()]);
      if (p.size() < 2 || last.kind != Token::Kind::Identifier || kTypeWords.count(last.text)) {
        unsupported("unnamed parameters are not supported");
        return;
      }
      ParamInfo info;
      info.name = std::string(last.text);
      info.line = last.line;
      info.column = last.column;
      info.type = canonical_text(toks(), g[p.front()], g[p[p.size() - 2]] + 1);
      f.params.push_back(std::move(info));
    }
  }

  std::string_view annotation_;
  ScanResult& out_;
  std::vector<Scope> scopes_;
  std::vector<long> scope_lines_;
  std::optional<std::size_t> pending_marker_;
};

}  // namespace

ScanResult scan_source(std::string_view source, std::string_view annotation) {
  ScanResult out;
  Scanner(source, annotation, out).run();
  return out;
}

}  // namespace testgen
