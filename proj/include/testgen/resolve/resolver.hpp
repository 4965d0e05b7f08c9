#pragma once

// Turns the pointer-bearing observations of one run into self-contained
// values. The map of full serializations is first built as a shared graph
// (pointers replaced by edges to the one full serialization), then copied
// per entry, then unfolded into depth-limited trees in which cycles appear as
// RecursionMarker.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "testgen/model/diagnostics.hpp"
#include "testgen/model/value.hpp"

namespace testgen {

using NodeId = std::size_t;

struct GraphNode {
  enum class Kind { Leaf, Object, Sequence };

  Kind kind = Kind::Leaf;
  ObservedValue leaf;  // Primitive, PointerRef, RecursionMarker or DepthTruncated
  std::string id;
  std::string class_name;
  std::vector<std::pair<std::string, NodeId>> fields;
  std::vector<NodeId> items;
};

/// Arena of value nodes in which a node may have several parents.
class ValueGraph {
 public:
  NodeId add(GraphNode node);
  /// Adds a tree copy of `v`; returns its root.
  NodeId import(const ObservedValue& v);

  GraphNode& at(NodeId id) { return nodes_[id]; }
  const GraphNode& at(NodeId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

  /// Children of `id` in field/item order.
  std::vector<NodeId> children(NodeId id) const;

 private:
  std::vector<GraphNode> nodes_;
};

/// objectId -> full serialization for one run.
///
/// While being built the entries are roots in `graph`; after remove_rec they
/// are plain trees in `trees` and the graph is released.
struct SerializationMap {
  int max_depth = 5;
  ValueGraph graph;
  std::map<std::string, NodeId> roots;
  std::map<std::string, ObservedValue> trees;
  /// Class of every id that had a full serialization, including dropped ones.
  std::map<std::string, std::string> classes;
  bool finalized = false;

  std::size_t size() const { return finalized ? trees.size() : roots.size(); }
  const ObservedValue* find(const std::string& id) const;
};

struct ResolvedObservation {
  ObservationRecord record;
};

/// Ids of every PointerRef reachable in the value.
std::set<std::string> pointer_serializations(const ObservedValue& v);
std::set<std::string> pointer_serializations(const ObservationRecord& r);

/// Every ObjectValue at any nesting, keyed by id. Throws
/// Error(DuplicateFullSerialization) when one id carries two incompatible
/// serializations.
std::map<std::string, ObservedValue> full_serializations(const ObservedValue& v);
std::map<std::string, ObservedValue> full_serializations(const ObservationRecord& r);

/// True when `a` and `b` agree wherever both were captured (DepthTruncated on
/// either side agrees with anything).
bool compatible(const ObservedValue& a, const ObservedValue& b);

/// Adds one full serialization as a graph entry. Its nested objects stay
/// inline; init_serialization links pointers to entries.
void add_entry(SerializationMap& map, const ObjectValue& full);

/// Replaces pointer children reachable from `root` with edges to the mapped
/// entry, descending at most `max_depth` levels and visiting each node once.
/// Returns the ids that had no entry; their PointerRef nodes stay in place.
std::set<std::string> init_serialization(SerializationMap& map, NodeId root, int max_depth);

/// Copy in which no node is reachable from two entries. Structure within one
/// entry, cycles included, is preserved. With a horizon only nodes within
/// that many levels of the entry root are copied; deeper nodes keep their id
/// and class but lose their children.
SerializationMap deep_copy(const SerializationMap& map, std::optional<int> horizon = std::nullopt);

/// Unfolds every entry into a tree: an object already on the path from the
/// entry root becomes RecursionMarker, then objects below `max_depth` become
/// empty shells and sequences below it become empty.
void remove_rec(SerializationMap& map, int max_depth);

/// Builds the finalized map for one run. Entries that depend on an
/// unresolved pointer are dropped and reported.
SerializationMap get_full_serialization_map(const std::vector<ObservationRecord>& records, int max_depth,
                                            Diagnostics* diagnostics = nullptr);

/// Replaces every object and pointer in each record by its mapped value,
/// re-applying the depth and recursion rules from the record root. Records
/// that need an unresolved id are dropped and reported.
std::vector<ResolvedObservation> resolve_observations(const std::vector<ObservationRecord>& records,
                                                      const SerializationMap& map,
                                                      Diagnostics* diagnostics = nullptr);

/// Resolves a single value; throws Error(UnresolvedPointer).
ObservedValue resolve_value(const ObservedValue& v, const SerializationMap& map);

}  // namespace testgen
