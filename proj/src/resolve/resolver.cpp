#include "testgen/resolve/resolver.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "testgen/model/errors.hpp"

namespace testgen {

NodeId ValueGraph::add(GraphNode node) {
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

NodeId ValueGraph::import(const ObservedValue& v) {
  if (const auto* o = std::get_if<ObjectValue>(&v.node)) {
    GraphNode n;
    n.kind = GraphNode::Kind::Object;
    n.id = o->id;
    n.class_name = o->class_name;
    NodeId self = add(std::move(n));
    for (const auto& f : o->fields) {
      NodeId child = import(f.value);
      nodes_[self].fields.emplace_back(f.name, child);
    }
    return self;
  }
  if (const auto* s = std::get_if<Sequence>(&v.node)) {
    GraphNode n;
    n.kind = GraphNode::Kind::Sequence;
    NodeId self = add(std::move(n));
    for (const auto& item : s->items) {
      NodeId child = import(item);
      nodes_[self].items.push_back(child);
    }
    return self;
  }
  GraphNode n;
  n.leaf = v;
  return add(std::move(n));
}

std::vector<NodeId> ValueGraph::children(NodeId id) const {
  const GraphNode& n = nodes_[id];
  std::vector<NodeId> out;
  out.reserve(n.fields.size() + n.items.size());
  for (const auto& f : n.fields) out.push_back(f.second);
  for (NodeId i : n.items) out.push_back(i);
  return out;
}

const ObservedValue* SerializationMap::find(const std::string& id) const {
  if (!finalized) return nullptr;
  auto it = trees.find(id);
  return it == trees.end() ? nullptr : &it->second;
}

namespace {

void collect_pointers(const ObservedValue& v, std::set<std::string>& out) {
  if (const auto* p = std::get_if<PointerRef>(&v.node)) {
    out.insert(p->id);
  } else if (const auto* o = std::get_if<ObjectValue>(&v.node)) {
    for (const auto& f : o->fields) collect_pointers(f.value, out);
  } else if (const auto* s = std::get_if<Sequence>(&v.node)) {
    for (const auto& item : s->items) collect_pointers(item, out);
  }
}

std::size_t node_count(const ObservedValue& v) {
  std::size_t n = v.is<DepthTruncated>() ? 0 : 1;
  if (const auto* o = std::get_if<ObjectValue>(&v.node)) {
    for (const auto& f : o->fields) n += node_count(f.value);
  } else if (const auto* s = std::get_if<Sequence>(&v.node)) {
    for (const auto& item : s->items) n += node_count(item);
  }
  return n;
}

std::string id_of(const ObservedValue& v) {
  if (const auto* o = std::get_if<ObjectValue>(&v.node)) return o->id;
  if (const auto* p = std::get_if<PointerRef>(&v.node)) return p->id;
  if (const auto* r = std::get_if<RecursionMarker>(&v.node)) return r->id;
  return {};
}

/// Keeps the more informative of two compatible serializations of one id.
void merge_full(std::map<std::string, ObservedValue>& out, const std::string& id, const ObservedValue& v) {
  auto [it, inserted] = out.emplace(id, v);
  if (inserted) return;
  if (!compatible(it->second, v)) {
    throw Error(ErrorCode::DuplicateFullSerialization,
                "object id " + id + " has two different full serializations");
  }
  if (node_count(v) > node_count(it->second)) it->second = v;
}

void collect_full(const ObservedValue& v, std::map<std::string, ObservedValue>& out) {
  if (const auto* o = std::get_if<ObjectValue>(&v.node)) {
    merge_full(out, o->id, v);
    for (const auto& f : o->fields) collect_full(f.value, out);
  } else if (const auto* s = std::get_if<Sequence>(&v.node)) {
    for (const auto& item : s->items) collect_full(item, out);
  }
}

std::string graph_id(const GraphNode& n) {
  if (n.kind == GraphNode::Kind::Object) return n.id;
  if (const auto* p = std::get_if<PointerRef>(&n.leaf.node)) return p->id;
  return {};
}

}  // namespace

std::set<std::string> pointer_serializations(const ObservedValue& v) {
  std::set<std::string> out;
  collect_pointers(v, out);
  return out;
}

std::set<std::string> pointer_serializations(const ObservationRecord& r) { return pointer_serializations(r.value); }

std::map<std::string, ObservedValue> full_serializations(const ObservedValue& v) {
  std::map<std::string, ObservedValue> out;
  collect_full(v, out);
  return out;
}

std::map<std::string, ObservedValue> full_serializations(const ObservationRecord& r) {
  return full_serializations(r.value);
}

bool compatible(const ObservedValue& a, const ObservedValue& b) {
  if (a.is<DepthTruncated>() || b.is<DepthTruncated>()) return true;
  std::string ia = id_of(a), ib = id_of(b);
  if (!ia.empty() || !ib.empty()) {
    if (ia != ib) return false;
    const auto* oa = std::get_if<ObjectValue>(&a.node);
    const auto* ob = std::get_if<ObjectValue>(&b.node);
    if (!oa || !ob) return true;
    if (oa->class_name != ob->class_name) return false;
    for (const auto& f : oa->fields) {
      if (const ObservedValue* other = ob->find_field(f.name)) {
        if (!compatible(f.value, *other)) return false;
      }
    }
    return true;
  }
  if (const auto* pa = std::get_if<Primitive>(&a.node)) {
    const auto* pb = std::get_if<Primitive>(&b.node);
    return pb && *pa == *pb;
  }
  if (const auto* sa = std::get_if<Sequence>(&a.node)) {
    const auto* sb = std::get_if<Sequence>(&b.node);
    if (!sb || sa->items.size() != sb->items.size()) return false;
    for (std::size_t i = 0; i < sa->items.size(); ++i) {
      if (!compatible(sa->items[i], sb->items[i])) return false;
    }
    return true;
  }
  return false;
}

void add_entry(SerializationMap& map, const ObjectValue& full) {
  NodeId root = map.graph.import(ObservedValue(full));
  map.roots[full.id] = root;
  map.classes[full.id] = full.class_name;
}

std::set<std::string> init_serialization(SerializationMap& map, NodeId root, int max_depth) {
  std::set<std::string> unresolved;
  std::unordered_set<NodeId> seen{root};
  std::vector<std::pair<NodeId, int>> stack{{root, 0}};
  auto link = [&](NodeId child) {
    std::string id = graph_id(map.graph.at(child));
    if (id.empty()) return child;
    auto it = map.roots.find(id);
    if (it != map.roots.end()) return it->second;
    if (map.graph.at(child).kind == GraphNode::Kind::Leaf) unresolved.insert(id);
    return child;
  };
  while (!stack.empty()) {
    auto [node, depth] = stack.back();
    stack.pop_back();
    auto visit = [&](NodeId& edge) {
      edge = link(edge);
      if (map.graph.at(edge).kind == GraphNode::Kind::Leaf) return;
      if (depth + 1 > max_depth) return;
      if (seen.insert(edge).second) stack.emplace_back(edge, depth + 1);
    };
    GraphNode& n = map.graph.at(node);
    for (auto& f : n.fields) visit(f.second);
    for (auto& item : n.items) visit(item);
  }
  return unresolved;
}

SerializationMap deep_copy(const SerializationMap& map, std::optional<int> horizon) {
  SerializationMap out;
  out.max_depth = map.max_depth;
  out.classes = map.classes;
  for (const auto& [id, root] : map.roots) {
    std::unordered_map<NodeId, NodeId> copies;
    std::deque<std::pair<NodeId, int>> queue;
    auto discover = [&](NodeId old, int depth) {
      auto it = copies.find(old);
      if (it != copies.end()) return it->second;
      GraphNode shell = map.graph.at(old);
      shell.fields.clear();
      shell.items.clear();
      NodeId fresh = out.graph.add(std::move(shell));
      copies.emplace(old, fresh);
      queue.emplace_back(old, depth);
      return fresh;
    };
    out.roots[id] = discover(root, 0);
    while (!queue.empty()) {
      auto [old, depth] = queue.front();
      queue.pop_front();
      if (horizon && depth >= *horizon) continue;
      const GraphNode& src = map.graph.at(old);
      NodeId self = copies.at(old);
      for (const auto& [name, child] : src.fields) {
        NodeId c = discover(child, depth + 1);
        out.graph.at(self).fields.emplace_back(name, c);
      }
      for (NodeId child : src.items) {
        NodeId c = discover(child, depth + 1);
        out.graph.at(self).items.push_back(c);
      }
    }
  }
  return out;
}

namespace {

bool on_path(const std::vector<std::string>& path, const std::string& id) {
  return std::find(path.begin(), path.end(), id) != path.end();
}

ObservedValue unfold(const ValueGraph& graph, NodeId node, int depth, int max_depth,
                     std::vector<std::string>& path) {
  const GraphNode& n = graph.at(node);
  switch (n.kind) {
    case GraphNode::Kind::Leaf:
      return n.leaf;
    case GraphNode::Kind::Sequence: {
      Sequence seq;
      if (depth > max_depth) return seq;
      for (NodeId item : n.items) seq.items.push_back(unfold(graph, item, depth + 1, max_depth, path));
      return seq;
    }
    case GraphNode::Kind::Object:
      break;
  }
  if (on_path(path, n.id)) return RecursionMarker{n.id};
  ObjectValue obj;
  obj.id = n.id;
  obj.class_name = n.class_name;
  if (depth > max_depth) return obj;
  path.push_back(n.id);
  for (const auto& [name, child] : n.fields) obj.set_field(name, unfold(graph, child, depth + 1, max_depth, path));
  path.pop_back();
  return obj;
}

}  // namespace

void remove_rec(SerializationMap& map, int max_depth) {
  map.trees.clear();
  for (const auto& [id, root] : map.roots) {
    std::vector<std::string> path;
    map.trees[id] = unfold(map.graph, root, 0, max_depth, path);
  }
  map.max_depth = max_depth;
  map.graph = ValueGraph();
  map.roots.clear();
  map.finalized = true;
}

SerializationMap get_full_serialization_map(const std::vector<ObservationRecord>& records, int max_depth,
                                            Diagnostics* diagnostics) {
  std::map<std::string, ObservedValue> full;
  for (const auto& r : records) {
    for (const auto& [id, v] : full_serializations(r)) merge_full(full, id, v);
  }

  SerializationMap map;
  map.max_depth = max_depth;
  for (const auto& [id, v] : full) add_entry(map, v.as<ObjectValue>());

  std::set<std::string> unresolved;
  for (const auto& [id, root] : map.roots) {
    auto missing = init_serialization(map, root, max_depth);
    unresolved.insert(missing.begin(), missing.end());
  }

  if (!unresolved.empty()) {
    // Everything that can reach a dangling pointer is dropped.
    std::vector<std::vector<NodeId>> parents(map.graph.size());
    std::deque<NodeId> work;
    std::vector<bool> tainted(map.graph.size(), false);
    for (NodeId n = 0; n < map.graph.size(); ++n) {
      for (NodeId c : map.graph.children(n)) parents[c].push_back(n);
      const GraphNode& g = map.graph.at(n);
      if (const auto* p = std::get_if<PointerRef>(&g.leaf.node); p && g.kind == GraphNode::Kind::Leaf) {
        tainted[n] = true;
        work.push_back(n);
      }
    }
    while (!work.empty()) {
      NodeId n = work.front();
      work.pop_front();
      for (NodeId p : parents[n]) {
        if (!tainted[p]) {
          tainted[p] = true;
          work.push_back(p);
        }
      }
    }
    if (diagnostics) {
      for (const auto& id : unresolved) {
        diagnostics->add("resolve", "UnresolvedPointer", "no full serialization for object " + id);
      }
    }
    for (auto it = map.roots.begin(); it != map.roots.end();) {
      if (tainted[it->second]) {
        if (diagnostics) {
          diagnostics->add("resolve", "UnresolvedPointer", "dropped object " + it->first + " (depends on a missing object)");
        }
        it = map.roots.erase(it);
      } else {
        ++it;
      }
    }
  }

  SerializationMap copy = deep_copy(map, max_depth + 1);
  remove_rec(copy, max_depth);
  return copy;
}

namespace {

ObservedValue materialize(const ObservedValue& v, int depth, const SerializationMap& map,
                          std::vector<std::string>& path) {
  if (const auto* s = std::get_if<Sequence>(&v.node)) {
    Sequence seq;
    if (depth > map.max_depth) return seq;
    for (const auto& item : s->items) seq.items.push_back(materialize(item, depth + 1, map, path));
    return seq;
  }
  const auto* obj = std::get_if<ObjectValue>(&v.node);
  if (!obj && !v.is<PointerRef>()) return v;

  std::string id = id_of(v);
  if (on_path(path, id)) return RecursionMarker{id};
  const ObservedValue* entry = map.find(id);
  if (depth > map.max_depth) {
    ObjectValue shell;
    shell.id = id;
    if (obj) {
      shell.class_name = obj->class_name;
    } else if (auto it = map.classes.find(id); it != map.classes.end()) {
      shell.class_name = it->second;
    } else {
      return DepthTruncated{};
    }
    return shell;
  }
  if (!entry) throw Error(ErrorCode::UnresolvedPointer, "no usable full serialization for object " + id);

  const auto& full = entry->as<ObjectValue>();
  ObjectValue out;
  out.id = id;
  out.class_name = full.class_name;
  path.push_back(id);
  for (const auto& f : full.fields) out.set_field(f.name, materialize(f.value, depth + 1, map, path));
  path.pop_back();
  return out;
}

}  // namespace

ObservedValue resolve_value(const ObservedValue& v, const SerializationMap& map) {
  if (!map.finalized) throw Error(ErrorCode::PreconditionViolation, "serialization map is not finalized");
  std::vector<std::string> path;
  return materialize(v, 0, map, path);
}

std::vector<ResolvedObservation> resolve_observations(const std::vector<ObservationRecord>& records,
                                                      const SerializationMap& map, Diagnostics* diagnostics) {
  std::vector<ResolvedObservation> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    try {
      ResolvedObservation resolved{r};
      resolved.record.value = resolve_value(r.value, map);
      out.push_back(std::move(resolved));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnresolvedPointer) throw;
      if (diagnostics) diagnostics->add("resolve", "UnresolvedPointer", "observation " + r.obs_id + " dropped: " + e.what());
    }
  }
  return out;
}

}  // namespace testgen
