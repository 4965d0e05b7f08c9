#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <thread>

#include "acceptance.hpp"
#include "support/generators.hpp"
#include "support/memory_sink.hpp"
#include "testgen/model/codec.hpp"
#include "testgen/publish/publisher.hpp"
#include "testgen/resolve/resolver.hpp"
#include "testgen/runtime/equality.hpp"
#include "testgen/runtime/serializer.hpp"

namespace acc {

struct Leaf {
  std::int64_t k = 0;
  std::string tag;
};

struct Box {
  std::int64_t id = 0;
  std::string label;
  std::shared_ptr<Leaf> leaf;
  std::vector<std::shared_ptr<Leaf>> extras;
};

struct C {
  int c = 3;
};
struct B {
  C c;
};
struct A {
  B b;
};
struct Foo {
  A a;
};

}  // namespace acc

TESTGEN_REFLECT(acc::Leaf, k, tag)
TESTGEN_REFLECT(acc::Box, id, label, leaf, extras)
TESTGEN_REFLECT(acc::C, c)
TESTGEN_REFLECT(acc::B, c)
TESTGEN_REFLECT(acc::A, b)
TESTGEN_REFLECT(acc::Foo, a)

using namespace testgen;
using namespace std::chrono_literals;

namespace acceptance {

namespace {

const MethodId kMethod{"fixture.cpp", "", "", "observe", "(T)->void", true, false};

SessionConfig session_config(int depth) {
  SessionConfig c;
  c.max_depth = depth;
  c.run_id = "acceptance";
  return c;
}

std::string count_detail(std::size_t bad, std::size_t total, const std::string& what) {
  return std::to_string(bad) + " violations in " + std::to_string(total) + " " + what;
}

void scan_occurrences(const ObservedValue& v, std::map<std::string, int>& full, std::set<std::string>& pointed,
                      std::size_t& pointers) {
  if (const auto* o = std::get_if<ObjectValue>(&v.node)) {
    ++full[o->id];
    for (const auto& f : o->fields) scan_occurrences(f.value, full, pointed, pointers);
  } else if (const auto* s = std::get_if<Sequence>(&v.node)) {
    for (const auto& item : s->items) scan_occurrences(item, full, pointed, pointers);
  } else if (const auto* p = std::get_if<PointerRef>(&v.node)) {
    pointed.insert(p->id);
    ++pointers;
  }
}

// 1. 10^4 logged objects, half of them repeats (aliases or structural
// copies), from 16 threads into one session.
Outcome dedup_property() {
  tgtest::Rng rng(1001);
  constexpr int kUnique = 5000;
  constexpr int kLeaves = 1000;
  std::vector<std::shared_ptr<acc::Leaf>> leaves;
  for (int i = 0; i < kLeaves; ++i) {
    leaves.push_back(std::make_shared<acc::Leaf>(acc::Leaf{i, "leaf" + std::to_string(i)}));
  }
  std::vector<std::shared_ptr<acc::Box>> boxes;
  std::set<int> used_leaves;
  for (int i = 0; i < kUnique; ++i) {
    auto b = std::make_shared<acc::Box>();
    b->id = i;
    b->label = "box" + std::to_string(i);
    int l = static_cast<int>(rng() % kLeaves);
    b->leaf = leaves[l];
    used_leaves.insert(l);
    for (int e = static_cast<int>(rng() % 3); e > 0; --e) {
      int x = static_cast<int>(rng() % kLeaves);
      b->extras.push_back(leaves[x]);
      used_leaves.insert(x);
    }
    boxes.push_back(b);
  }
  std::vector<std::shared_ptr<acc::Box>> logged(boxes);
  for (int i = 0; i < kUnique; ++i) {
    const auto& original = boxes[rng() % kUnique];
    logged.push_back(i % 2 == 0 ? original : std::make_shared<acc::Box>(*original));
  }
  std::shuffle(logged.begin(), logged.end(), rng);

  tgtest::MemorySink sink;
  SerializationSession session(session_config(5), &sink);
  std::vector<std::thread> threads;
  constexpr int kThreads = 16;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t i = t; i < logged.size(); i += kThreads) {
        session.log_observation(kMethod, ObsKind::Parameter, 0, 1, 1, make_handle(*logged[i]),
                                "inv" + std::to_string(i));
      }
    });
  }
  for (auto& th : threads) th.join();

  auto records = sink.records();
  std::map<std::string, int> full;
  std::set<std::string> pointed;
  std::size_t pointers = 0;
  for (const auto& r : records) scan_occurrences(r.value, full, pointed, pointers);
  std::size_t violations = 0;
  for (const auto& [id, n] : full) violations += n != 1;
  for (const auto& id : pointed) violations += !full.count(id);
  std::size_t expected_unique = kUnique + used_leaves.size();
  violations += full.size() != expected_unique;
  violations += records.size() != logged.size();
  violations += !session.diagnostics().empty();
  return {violations == 0, std::to_string(records.size()) + " records, " + std::to_string(full.size()) +
                               " unique ids (expected " + std::to_string(expected_unique) + "), " +
                               std::to_string(pointers) + " pointers, " + std::to_string(violations) + " violations"};
}

// 2. Foo -> A -> B -> C at maxDepth 1.
Outcome depth_example() {
  acc::Foo foo;
  SerializationSession session(session_config(1));
  ObservedValue actual = strip_ids(serialize_object(foo, session));
  ObjectValue a{"", "acc::A", {}};
  a.set_field("b", DepthTruncated{});
  ObjectValue expected{"", "acc::Foo", {}};
  expected.set_field("a", a);
  bool ok = actual == ObservedValue(expected);
  return {ok, "serialized as " + encode_value(actual)};
}

struct GraphRun {
  int max_depth;
  std::vector<const tgtest::GNode*> roots;
  std::vector<ObservationRecord> records;
};

GraphRun log_graph(const tgtest::Graph& g, int max_depth, tgtest::Rng& rng) {
  GraphRun run;
  run.max_depth = max_depth;
  tgtest::MemorySink sink;
  SerializationSession session(session_config(max_depth), &sink);
  run.roots.push_back(g.nodes[0].get());
  int extra = static_cast<int>(rng() % 4);
  for (int i = 0; i < extra; ++i) run.roots.push_back(g.nodes[rng() % g.nodes.size()].get());
  for (std::size_t i = 0; i < run.roots.size(); ++i) {
    session.log_observation(kMethod, ObsKind::Parameter, 0, 1, 1, make_handle(*run.roots[i]),
                            "inv" + std::to_string(i));
  }
  run.records = sink.records();
  return run;
}

ObservedValue comparable(const ObservedValue& v, int max_depth) {
  return strip_ids(tgtest::beyond_depth_as_null(v, max_depth));
}

bool resolves_to_snapshot(const tgtest::Graph& g, int depth, tgtest::Rng& rng, bool exact, std::size_t& compared,
                          std::size_t& with_pointers) {
  GraphRun run = log_graph(g, depth, rng);
  for (const auto& r : run.records) with_pointers += !pointer_serializations(r).empty();
  Diagnostics diag;
  auto map = get_full_serialization_map(run.records, depth, &diag);
  auto resolved = resolve_observations(run.records, map, &diag);
  if (resolved.size() != run.records.size()) return false;
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    ++compared;
    ObservedValue got = comparable(resolved[i].record.value, depth);
    ObservedValue want = comparable(tgtest::oracle_snapshot(*run.roots[i], depth), depth);
    if (exact ? got != want : !assert_equal_common_fields(want, got).passed) return false;
  }
  return true;
}

// 3. Resolution against a brute-force deep snapshot of the live graph. The
// exact match needs graphs that fit within maxDepth: an object first met deep
// in one observation is stored cut short, and a later pointer to it cannot
// recover what was never captured. Deeper graphs must still never contradict
// the snapshot.
Outcome resolver_oracle() {
  tgtest::Rng rng(3003);
  std::size_t compared = 0, with_pointers = 0, exact_failures = 0, contradictions = 0, deeper = 0;
  for (int round = 0; round < 500; ++round) {
    auto g = tgtest::random_dag(rng, std::uniform_int_distribution<int>(1, 50)(rng), 40);
    int height = tgtest::container_height(*g.nodes[0]);
    int depth = height + std::uniform_int_distribution<int>(0, 2)(rng);
    exact_failures += !resolves_to_snapshot(g, depth, rng, true, compared, with_pointers);
    if (height > 1) {
      ++deeper;
      int shallow = std::uniform_int_distribution<int>(1, height - 1)(rng);
      contradictions += !resolves_to_snapshot(g, shallow, rng, false, compared, with_pointers);
    }
  }
  return {exact_failures == 0 && contradictions == 0,
          "500 graphs within maxDepth, " + std::to_string(exact_failures) + " mismatches; " + std::to_string(deeper) +
              " deeper than maxDepth, " + std::to_string(contradictions) + " contradictions; " +
              std::to_string(compared) + " observations (" + std::to_string(with_pointers) + " with pointers)"};
}

// Follows `link` from the root; the step at which a RecursionMarker appears,
// or -1.
int marker_step(const ObservedValue& root, int limit) {
  const ObservedValue* v = &root;
  for (int step = 0; step <= limit; ++step) {
    if (v->is<RecursionMarker>()) return step;
    const auto* o = std::get_if<ObjectValue>(&v->node);
    if (!o) return -1;
    v = o->find_field("link");
    if (!v) return -1;
  }
  return -1;
}

// 4. Resolved values hold no pointers, nothing captured beyond maxDepth, and
// a RecursionMarker where every planted cycle closes.
Outcome no_pointer_guarantee() {
  tgtest::Rng rng(4004);
  std::size_t scanned = 0, violations = 0, cycles = 0, markers = 0;
  auto check = [&](const std::vector<ResolvedObservation>& resolved, int depth) {
    for (const auto& r : resolved) {
      ++scanned;
      tgtest::Census c;
      tgtest::census(r.record.value, c);
      if (c.pointers != 0 || c.deepest_content > depth) ++violations;
    }
  };
  for (int round = 0; round < 100; ++round) {
    int depth = std::uniform_int_distribution<int>(1, 6)(rng);
    auto g = tgtest::random_dag(rng, std::uniform_int_distribution<int>(1, 40)(rng), 50);
    GraphRun run = log_graph(g, depth, rng);
    Diagnostics diag;
    auto map = get_full_serialization_map(run.records, depth, &diag);
    auto resolved = resolve_observations(run.records, map, &diag);
    violations += run.records.size() - resolved.size();
    check(resolved, depth);
  }
  for (int fixture = 0; fixture < 50; ++fixture) {
    int depth = std::uniform_int_distribution<int>(3, 7)(rng);
    int k = std::uniform_int_distribution<int>(2, depth - 1)(rng);
    int j = std::uniform_int_distribution<int>(0, k - 1)(rng);
    std::vector<std::shared_ptr<tgtest::GNode>> chain;
    for (int i = 0; i < k; ++i) {
      auto n = std::make_shared<tgtest::GNode>();
      n->tag = fixture * 100 + i;
      n->label = "c" + std::to_string(i);
      if (rng() & 1) {
        auto noise = tgtest::random_dag(rng, 3, 0);
        n->kids.push_back(noise.nodes[0]);
      }
      chain.push_back(n);
    }
    for (int i = 0; i + 1 < k; ++i) chain[i]->link = chain[i + 1];
    chain[k - 1]->link = chain[j];
    int s = std::uniform_int_distribution<int>(0, k - 1)(rng);

    tgtest::MemorySink sink;
    SerializationSession session(session_config(depth), &sink);
    session.log_observation(kMethod, ObsKind::Parameter, 0, 1, 1, make_handle(*chain[0]), "a");
    session.log_observation(kMethod, ObsKind::Parameter, 0, 1, 1, make_handle(*chain[s]), "b");
    auto records = sink.records();
    Diagnostics diag;
    auto map = get_full_serialization_map(records, depth, &diag);
    auto resolved = resolve_observations(records, map, &diag);
    violations += records.size() - resolved.size();
    check(resolved, depth);
    const int starts[] = {0, s};
    for (std::size_t i = 0; i < resolved.size() && i < 2; ++i) {
      ++cycles;
      int start = starts[i];
      int expected = start <= j ? k - start : k - j;
      if (marker_step(resolved[i].record.value, depth + 1) == expected) ++markers;
    }
    chain[k - 1]->link.reset();
  }
  bool ok = violations == 0 && markers == cycles && cycles == 100;
  return {ok, count_detail(violations, scanned, "resolved values") + ", markers on " + std::to_string(markers) + "/" +
                  std::to_string(cycles) + " planted cycle closures"};
}

// Number of consecutive captured objects along `link` starting at `v`.
int captured_chain(const ObservedValue& v) {
  int n = 0;
  const ObservedValue* cur = &v;
  while (const auto* o = std::get_if<ObjectValue>(&cur->node)) {
    if (o->fields.empty()) break;
    ++n;
    cur = o->find_field("link");
    if (!cur) break;
  }
  return n;
}

// 5. One full serialization P reached at depth 1 and at depth maxDepth-1 of
// the same observation ends up with two differently trimmed copies.
Outcome deep_copy_independence() {
  constexpr int kDepth = 4;
  std::vector<std::shared_ptr<tgtest::GNode>> chain;
  for (int i = 0; i < 6; ++i) {
    auto n = std::make_shared<tgtest::GNode>();
    n->tag = 10 + i;
    n->label = "p" + std::to_string(i);
    chain.push_back(n);
  }
  for (int i = 0; i + 1 < 6; ++i) chain[i]->link = chain[i + 1];
  auto a = std::make_shared<tgtest::GNode>();
  a->tag = 1;
  a->label = "A";
  auto m = std::make_shared<tgtest::GNode>();
  m->tag = 2;
  m->label = "M";
  a->link = chain[0];
  a->kids.push_back(m);
  m->link = chain[0];

  tgtest::MemorySink sink;
  SerializationSession session(session_config(kDepth), &sink);
  session.log_observation(kMethod, ObsKind::Parameter, 0, 1, 1, make_handle(*chain[0]), "p");
  session.log_observation(kMethod, ObsKind::Parameter, 0, 1, 1, make_handle(*a), "a");
  auto records = sink.records();
  auto map = get_full_serialization_map(records, kDepth);
  auto resolved = resolve_observations(records, map);
  if (resolved.size() != 2) return {false, "observations were dropped"};
  const ObservedValue& root = resolved[1].record.value;
  const auto& ro = root.as<ObjectValue>();
  const ObservedValue& shallow = *ro.find_field("link");
  const ObservedValue& deep =
      *ro.find_field("kids")->as<Sequence>().items.at(0).as<ObjectValue>().find_field("link");
  int shallow_chain = captured_chain(shallow);
  int deep_chain = captured_chain(deep);
  bool structure = comparable(root, kDepth) == comparable(tgtest::oracle_snapshot(*a, kDepth), kDepth);
  bool ok = records[1].value.is<ObjectValue>() && !pointer_serializations(records[1]).empty() && structure &&
            shallow_chain == kDepth && deep_chain == 2;
  return {ok, "occurrence at depth 1 keeps " + std::to_string(shallow_chain) + " levels, at depth " +
                  std::to_string(kDepth - 1) + " keeps " + std::to_string(deep_chain) +
                  (structure ? ", matches the deep snapshot" : ", differs from the deep snapshot")};
}

ObservedValue object(std::vector<std::pair<std::string, ObservedValue>> fields) {
  ObjectValue o{"id", "Cls", {}};
  for (auto& [k, v] : fields) o.set_field(k, std::move(v));
  return o;
}

struct PrimitiveSlot {
  std::vector<PathStep> path;
  ObservedValue* value;
};

void primitive_slots(ObservedValue& v, std::vector<PathStep>& path, std::vector<PrimitiveSlot>& out) {
  if (v.is<Primitive>()) {
    out.push_back({path, &v});
  } else if (auto* o = std::get_if<ObjectValue>(&v.node)) {
    for (auto& f : o->fields) {
      path.push_back(PathStep{f.name, std::nullopt});
      primitive_slots(f.value, path, out);
      path.pop_back();
    }
  } else if (auto* s = std::get_if<Sequence>(&v.node)) {
    for (std::size_t i = 0; i < s->items.size(); ++i) {
      path.push_back(PathStep{{}, i});
      primitive_slots(s->items[i], path, out);
      path.pop_back();
    }
  }
}

void objects_in(ObservedValue& v, std::vector<ObjectValue*>& out) {
  if (auto* o = std::get_if<ObjectValue>(&v.node)) {
    out.push_back(o);
    for (auto& f : o->fields) objects_in(f.value, out);
  } else if (auto* s = std::get_if<Sequence>(&v.node)) {
    for (auto& item : s->items) objects_in(item, out);
  }
}

Primitive changed(const Primitive& p) {
  switch (p.kind) {
    case PrimitiveKind::Bool:
      return make_bool(p.lexeme != "true");
    case PrimitiveKind::Int:
      return make_int(static_cast<std::int64_t>(static_cast<std::uint64_t>(std::stoll(p.lexeme)) + 1));
    case PrimitiveKind::Float: {
      double d = std::strtod(p.lexeme.c_str(), nullptr);
      for (double c : {d + 1, d / 2, 0.5, 1.0}) {
        if (float_lexeme(c) != p.lexeme) return make_float(c);
      }
      return make_string(p.lexeme);
    }
    case PrimitiveKind::Char:
      return make_char(p.lexeme == "a" ? 'b' : 'a');
    case PrimitiveKind::String:
      return make_string(p.lexeme + "~");
    case PrimitiveKind::Unit:
      break;
  }
  return make_int(0);
}

// 8. The three table rows plus 1000 random cases of each property.
Outcome common_fields_equality() {
  std::size_t violations = 0;
  violations += !assert_equal_common_fields(object({{"x", make_int(1)}}),
                                            object({{"x", make_int(1)}, {"y", make_int(2)}}))
                     .passed;
  auto bools = assert_equal_common_fields(object({{"x", make_bool(true)}}), object({{"x", make_bool(false)}}));
  violations += bools.passed || !bools.first_diff || bools.first_diff->field_path != "x" ||
                bools.first_diff->expected_lexeme != "true" || bools.first_diff->actual_lexeme != "false";
  auto same = object({{"x", make_int(1)}, {"s", Sequence{{make_string("a")}}}});
  violations += !assert_equal_common_fields(same, same).passed;

  tgtest::Rng rng(8008);
  std::size_t additions = 0, changes = 0;
  while (additions < 1000 || changes < 1000) {
    ObservedValue expected = tgtest::random_value(rng, 4);
    if (!assert_equal_common_fields(expected, expected).passed) {
      ++violations;
      continue;
    }
    if (additions < 1000) {
      ObservedValue grown = expected;
      std::vector<ObjectValue*> objs;
      objects_in(grown, objs);
      if (!objs.empty()) {
        ++additions;
        for (int k = static_cast<int>(rng() % 3) + 1; k > 0; --k) {
          objs.clear();
          objects_in(grown, objs);
          ObjectValue* o = objs[rng() % objs.size()];
          std::string name = "extra_" + tgtest::random_ident(rng);
          if (!o->find_field(name)) o->set_field(name, tgtest::random_value(rng, 2));
        }
        bool forward = assert_equal_common_fields(expected, grown).passed;
        bool backward = assert_equal_common_fields(grown, expected).passed;
        violations += !forward || !backward;
      }
    }
    if (changes < 1000) {
      ObservedValue mutated = expected;
      std::vector<PrimitiveSlot> slots;
      std::vector<PathStep> path;
      primitive_slots(mutated, path, slots);
      if (!slots.empty()) {
        ++changes;
        PrimitiveSlot& slot = slots[rng() % slots.size()];
        *slot.value = changed(slot.value->as<Primitive>());
        auto v = assert_equal_common_fields(expected, mutated);
        violations += v.passed || !v.first_diff || render_path(v.first_diff->path) != render_path(slot.path);
      }
    }
  }
  return {violations == 0, "3 table rows, " + std::to_string(additions) + " field additions, " +
                               std::to_string(changes) + " primitive changes, " + std::to_string(violations) +
                               " violations"};
}

std::size_t union_of(const std::vector<PoolEntry>& pool, const std::vector<std::string>& ids) {
  std::set<std::string> covered;
  for (const auto& p : pool) {
    if (std::find(ids.begin(), ids.end(), p.test_id) != ids.end()) covered.insert(p.coverage.begin(), p.coverage.end());
  }
  return covered.size();
}

// 10. Greedy selection against exhaustive search.
Outcome greedy_selection() {
  std::vector<PoolEntry> hand{{"t1", {"a", "b"}}, {"t2", {"b"}}, {"t3", {"c"}}};
  auto picked = select_tests(hand);
  bool hand_ok = picked == std::vector<std::string>{"t1", "t3"};
  tgtest::Rng rng(1010);
  std::size_t mismatches = 0;
  for (int round = 0; round < 200; ++round) {
    int tests = std::uniform_int_distribution<int>(1, 10)(rng);
    int items = std::uniform_int_distribution<int>(1, 20)(rng);
    std::vector<PoolEntry> pool;
    for (int t = 0; t < tests; ++t) {
      PoolEntry e{"t" + std::to_string(t), {}};
      for (int i = 0; i < items; ++i) {
        if (rng() % 3 == 0) e.coverage.insert("src.cpp:" + std::to_string(i));
      }
      pool.push_back(std::move(e));
    }
    std::size_t best = 0;
    for (std::uint32_t mask = 0; mask < (1u << tests); ++mask) {
      std::set<std::string> covered;
      for (int t = 0; t < tests; ++t) {
        if (mask & (1u << t)) covered.insert(pool[t].coverage.begin(), pool[t].coverage.end());
      }
      best = std::max(best, covered.size());
    }
    mismatches += union_of(pool, select_tests(pool)) != best;
  }
  std::string shown;
  for (const auto& id : picked) shown += (shown.empty() ? "" : ",") + id;
  return {hand_ok && mismatches == 0,
          "hand instance -> [" + shown + "], " + std::to_string(mismatches) + "/200 random pools below optimum"};
}

}  // namespace

std::vector<Criterion> value_criteria() {
  return {
      {1, "dedup property", 60s, dedup_property},
      {2, "depth example", 1s, depth_example},
      {3, "resolver oracle", 120s, resolver_oracle},
      {4, "no-pointer guarantee", 60s, no_pointer_guarantee},
      {5, "deep-copy independence", 1s, deep_copy_independence},
      {8, "common-fields equality", 30s, common_fields_equality},
      {10, "greedy selection", 10s, greedy_selection},
  };
}

}  // namespace acceptance
