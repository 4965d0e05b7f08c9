#pragma once

// Random values, random object graphs and independent oracles shared by the
// unit and acceptance tests.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "testgen/model/value.hpp"
#include "testgen/runtime/reflect.hpp"

namespace tgtest {

using Rng = std::mt19937_64;

inline std::string random_string(Rng& rng, std::size_t max_len = 8) {
  static const std::string alphabet = "abcXYZ019 _-\"\\/\n\t\x01{}[]:,\xc3\xa9";
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    char c = alphabet[pick(rng)];
    if (c == '\xc3') {
      s += "\xc3\xa9";
    } else if (c != '\xa9') {
      s += c;
    }
  }
  return s;
}

inline std::string random_ident(Rng& rng) {
  static const std::string letters = "abcdefghijklmnopqrstuvwxyz_";
  std::uniform_int_distribution<std::size_t> len(1, 6);
  std::uniform_int_distribution<std::size_t> pick(0, letters.size() - 1);
  std::string s;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) s += letters[pick(rng)];
  return s;
}

inline testgen::Primitive random_primitive(Rng& rng) {
  switch (std::uniform_int_distribution<int>(0, 5)(rng)) {
    case 0:
      return testgen::make_bool(rng() & 1);
    case 1:
      return testgen::make_int(static_cast<std::int64_t>(rng()));
    case 2: {
      switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
        case 0:
          return testgen::make_float(std::numeric_limits<double>::infinity());
        case 1:
          return testgen::make_float(std::uniform_real_distribution<double>(-1e6, 1e6)(rng));
        default: {
          std::uint64_t bits = rng();
          double d;
          std::memcpy(&d, &bits, sizeof d);
          return testgen::make_float(d);
        }
      }
    }
    case 3:
      return testgen::make_char(static_cast<char>(std::uniform_int_distribution<int>(32, 126)(rng)));
    case 4:
      return testgen::make_string(random_string(rng));
    default:
      return testgen::make_unit();
  }
}

inline std::string random_id(Rng& rng) {
  static const char hex[] = "0123456789abcdef";
  std::string s(32, '0');
  for (auto& c : s) c = hex[rng() & 15];
  return s;
}

/// Any ObservedValue, every variant reachable.
inline testgen::ObservedValue random_value(Rng& rng, int budget) {
  int choice = std::uniform_int_distribution<int>(0, budget > 0 ? 6 : 3)(rng);
  switch (choice) {
    case 0:
    case 1:
      return random_primitive(rng);
    case 2:
      return testgen::PointerRef{random_id(rng)};
    case 3:
      if (rng() & 1) return testgen::RecursionMarker{random_id(rng)};
      return testgen::DepthTruncated{};
    case 4:
    case 5: {
      testgen::ObjectValue o;
      o.id = random_id(rng);
      o.class_name = "ns::" + random_ident(rng);
      int n = std::uniform_int_distribution<int>(0, 4)(rng);
      for (int i = 0; i < n; ++i) o.set_field(random_ident(rng), random_value(rng, budget - 1));
      return o;
    }
    default: {
      testgen::Sequence s;
      int n = std::uniform_int_distribution<int>(0, 4)(rng);
      for (int i = 0; i < n; ++i) s.items.push_back(random_value(rng, budget - 1));
      return s;
    }
  }
}

// ---------------------------------------------------------------------------
// Live object graphs.

struct GNode {
  std::int64_t tag = 0;
  std::string label;
  std::vector<std::shared_ptr<GNode>> kids;
  std::shared_ptr<GNode> link;
};

struct Graph {
  std::vector<std::shared_ptr<GNode>> nodes;  // nodes[0] is the root
};

/// Random DAG: every edge goes from a lower to a higher node index, with
/// `share_percent` of the edges landing on an already-used node.
inline Graph random_dag(Rng& rng, int node_count, int share_percent = 30) {
  Graph g;
  for (int i = 0; i < node_count; ++i) {
    auto n = std::make_shared<GNode>();
    n->tag = static_cast<std::int64_t>(rng() >> 1);
    n->label = "n" + std::to_string(i) + "_" + std::to_string(rng() % 1000);
    g.nodes.push_back(n);
  }
  std::vector<bool> used(node_count, false);
  used[0] = true;
  int next = 1;
  for (int i = 0; i < node_count && next < node_count; ++i) {
    int fan = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int k = 0; k < fan && next < node_count; ++k) g.nodes[i]->kids.push_back(g.nodes[next++]);
  }
  for (int i = 0; i < node_count; ++i) {
    if (std::uniform_int_distribution<int>(0, 99)(rng) >= share_percent || i + 1 >= node_count) continue;
    int target = std::uniform_int_distribution<int>(i + 1, node_count - 1)(rng);
    if (rng() & 1) {
      g.nodes[i]->link = g.nodes[target];
    } else {
      g.nodes[i]->kids.push_back(g.nodes[target]);
    }
  }
  return g;
}

/// Deepest object or sequence below `n`, counted as the serializer counts.
inline int container_height(const GNode& n) {
  int h = 1;  // the kids sequence
  for (const auto& k : n.kids) h = std::max(h, 2 + container_height(*k));
  if (n.link) h = std::max(h, 1 + container_height(*n.link));
  return h;
}

/// Depth-limited deep copy of a live GNode graph written directly against
/// the struct. Ids are left empty; compare with strip_ids. Cycles are cut by
/// pointer identity on the current path.
inline testgen::ObservedValue oracle_snapshot(const GNode* n, int depth, int max_depth,
                                              std::vector<const GNode*>& path) {
  using namespace testgen;
  if (!n) return make_unit();
  for (const GNode* p : path) {
    if (p == n) return RecursionMarker{};
  }
  if (depth > max_depth) return DepthTruncated{};
  ObjectValue o;
  o.class_name = "tgtest::GNode";
  o.set_field("tag", make_int(n->tag));
  o.set_field("label", make_string(n->label));
  path.push_back(n);
  if (depth + 1 > max_depth) {
    o.set_field("kids", DepthTruncated{});
  } else {
    Sequence kids;
    for (const auto& k : n->kids) kids.items.push_back(oracle_snapshot(k.get(), depth + 2, max_depth, path));
    o.set_field("kids", std::move(kids));
  }
  o.set_field("link", oracle_snapshot(n->link.get(), depth + 1, max_depth, path));
  path.pop_back();
  return o;
}

inline testgen::ObservedValue oracle_snapshot(const GNode& root, int max_depth) {
  std::vector<const GNode*> path;
  return oracle_snapshot(&root, 0, max_depth, path);
}

/// Maps every object, sequence or marker deeper than `max_depth` to
/// DepthTruncated. Empty object shells and empty sequences that stand in
/// for uncaptured values compare equal to the explicit null this way.
inline testgen::ObservedValue beyond_depth_as_null(const testgen::ObservedValue& v, int max_depth, int depth = 0) {
  using namespace testgen;
  if (v.is<Primitive>()) return v;
  if (depth > max_depth) return DepthTruncated{};
  if (const auto* o = std::get_if<ObjectValue>(&v.node)) {
    ObjectValue out;
    out.id = o->id;
    out.class_name = o->class_name;
    for (const auto& f : o->fields) out.set_field(f.name, beyond_depth_as_null(f.value, max_depth, depth + 1));
    return out;
  }
  if (const auto* s = std::get_if<Sequence>(&v.node)) {
    Sequence out;
    for (const auto& item : s->items) out.items.push_back(beyond_depth_as_null(item, max_depth, depth + 1));
    return out;
  }
  return v;
}

/// Counts of each node kind in a value.
struct Census {
  std::size_t objects = 0, pointers = 0, markers = 0, truncated = 0, sequences = 0, primitives = 0;
  int deepest_content = 0;  // deepest non-empty object or sequence
};

inline void census(const testgen::ObservedValue& v, Census& c, int depth = 0) {
  using namespace testgen;
  if (const auto* o = std::get_if<ObjectValue>(&v.node)) {
    ++c.objects;
    if (!o->fields.empty()) c.deepest_content = std::max(c.deepest_content, depth);
    for (const auto& f : o->fields) census(f.value, c, depth + 1);
  } else if (const auto* s = std::get_if<Sequence>(&v.node)) {
    ++c.sequences;
    if (!s->items.empty()) c.deepest_content = std::max(c.deepest_content, depth);
    for (const auto& item : s->items) census(item, c, depth + 1);
  } else if (v.is<PointerRef>()) {
    ++c.pointers;
  } else if (v.is<RecursionMarker>()) {
    ++c.markers;
  } else if (v.is<DepthTruncated>()) {
    ++c.truncated;
  } else {
    ++c.primitives;
  }
}

}  // namespace tgtest

TESTGEN_REFLECT(tgtest::GNode, tag, label, kids, link)
