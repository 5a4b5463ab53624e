#pragma once

// Package-wide analysis index: one record per function (conversion pairs,
// resolved trait bounds, alias graph, visibility), the call edges between
// functions, and a return-type index used to locate constructors.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "typesift/alias_graph.hpp"
#include "typesift/ir.hpp"
#include "typesift/type_semantics.hpp"

namespace typesift {

enum class ConversionOp { cast, transmute };
enum class Scenario { con_con, con_gen, gen_con };

struct SitePath {
  std::string function;
  BlockId block = 0;
  // Statement index inside the block; statements.size() denotes the
  // terminator position.
  std::uint32_t statement = 0;
};

bool operator<(const SitePath& a, const SitePath& b);
bool operator==(const SitePath& a, const SitePath& b);

// One pointer conversion. src/dst hold the pointee descriptors (the
// conversion itself is between pointers); dst_mutable reflects the converted
// pointer's own mutability flag.
struct ConversionPair {
  TypeDescriptor src;
  TypeDescriptor dst;
  ConversionOp op = ConversionOp::cast;
  SitePath site;
  LocalId dst_local = 0;
  Scenario scenario = Scenario::con_con;
  bool dst_mutable = false;
  std::set<std::string> bounds;  // resolved bounds of the generic side
};

struct FunctionRecord {
  std::string name;
  TypeDescriptor return_type;
  bool marked_unsafe = false;
  bool visible = false;
  Visibility declared_visibility = Visibility::private_;
  std::optional<std::string> method_of;
  std::vector<ConversionPair> pairs;
  std::map<std::string, std::set<std::string>> bounds_by_param;
  AliasGraph aliases;
};

struct PropertyGraph {
  std::string package;
  std::map<std::string, FunctionRecord> records;
  std::vector<std::pair<std::string, std::string>> call_edges;  // caller -> callee
  std::map<std::string, std::vector<std::string>> functions_by_return;
};

// Scans cast_ptr_to_ptr/transmute rvalues. Gen->Gen conversions are dropped
// (generic-to-generic is rejected at runtime by the id check the pattern
// models); every other conversion yields exactly one pair.
std::vector<ConversionPair> collect_conversion_pairs(const FunctionIR& fn,
                                                     const TraitMap& traits,
                                                     const PackageIR& pkg);

// Requires a package that validates; throws std::invalid_argument otherwise.
PropertyGraph build_property_graph(const PackageIR& pkg, const TraitMap& traits);

// Functions whose return type constructs `ty` (aggregates match by name,
// anything else by exact descriptor). Sorted by name.
std::vector<std::string> find_constructors(const TypeDescriptor& ty,
                                           const PropertyGraph& g);

// Direct (depth-1) call neighbours; sorted, deduplicated.
std::vector<std::string> callers_of(const std::string& fn, const PropertyGraph& g);
std::vector<std::string> callees_of(const std::string& fn, const PropertyGraph& g);

// Debug rendering behind the CLI dump flag.
std::string property_graph_to_json(const PropertyGraph& g);

const char* scenario_name(Scenario s);

}  // namespace typesift
