#pragma once

// Per-function, flow-sensitive-in-order alias graph. A directed edge a -> b
// records that local a was created as an alias of local b (reference, raw
// pointer, pointer cast, transmute, or call argument flowing into the call
// destination). Moves delete the edge they would have created; storage_dead(x)
// deletes every edge originating at x.

#include <map>
#include <set>
#include <string>

#include "typesift/ir.hpp"

namespace typesift {

struct AliasGraph {
  // Every local of the function appears as a key; values are edge targets.
  std::map<LocalId, std::set<LocalId>> adjacency;

  bool has_node(LocalId id) const { return adjacency.count(id) != 0; }
  void insert_edge(LocalId from, LocalId to);
  void erase_edge(LocalId from, LocalId to);
  void erase_edges_from(LocalId from);
  std::size_t edge_count() const;
};

// Single forward pass over blocks in index order, statements then terminator.
AliasGraph build_alias_graph(const FunctionIR& fn);

// Locals reachable from `start` along edge direction. `start` itself is
// excluded unless a cycle leads back to it. Throws std::out_of_range for
// unknown nodes.
std::set<LocalId> descendants(const AliasGraph& g, LocalId start);

// True iff the reachable sets of a and b (each including the local itself)
// intersect. Symmetric by construction.
bool may_alias(const AliasGraph& g, LocalId a, LocalId b);

// DOT rendering for debugging (one node per local, directed edges).
std::string to_dot(const AliasGraph& g, const std::string& fn_name);

}  // namespace typesift
