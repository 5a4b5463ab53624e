#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "typesift/detectors.hpp"
#include "typesift/property_graph.hpp"

namespace typesift {

// How a converted pointer was observed escaping into an actual access.
enum class EvidenceKind {
  deref_in_function,
  unsafe_api_argument,
  returned_as_reference,
};

const char* evidence_kind_name(EvidenceKind k);

struct AccessEvidence {
  EvidenceKind kind = EvidenceKind::deref_in_function;
  SitePath site;
  LocalId aliased_local = 0;
};

enum class SuppressionReason {
  pre_type_check,
  post_type_check,
  caller_conversion_chain,
  constructor_guard,
};

const char* suppression_reason_name(SuppressionReason r);

struct Suppression {
  SuppressionReason reason = SuppressionReason::pre_type_check;
  SitePath site;
  std::string pattern;
};

struct BugReport {
  Finding finding;
  AccessEvidence evidence;
  // Developer checks that were found nearby but guard a different bug class.
  std::vector<Suppression> suppressions_considered;
  std::string package;
  std::string function;
};

// Calls whose arguments count as memory accesses through the raw pointer.
class UnsafeApiCatalog {
 public:
  static UnsafeApiCatalog builtin();

  void add(const std::string& name, std::initializer_list<BugKind> kinds);
  // Matches the callee by full path or by its final :: segment. A terminator
  // explicitly flagged unsafe counts for every bug class.
  bool is_access(const std::string& callee, BugKind kind, bool flagged) const;

 private:
  std::map<std::string, unsigned> masks_;
};

// Calls that look like the developer already validating the conversion.
class SuppressionCatalog {
 public:
  enum class Position { pre, post };

  static SuppressionCatalog builtin();

  void add(const std::string& name, BugKind kind, Position position);
  // Overlay document: {"my_crate::check_align": {"I": "pre", "III": "post"}}
  void merge_overlay_json(const std::string& text);

  // All (bug class, position) entries the callee matches, full path or final
  // segment.
  std::vector<std::pair<BugKind, Position>> lookup(const std::string& callee) const;

 private:
  std::map<std::string, std::map<BugKind, Position>> entries_;
};

struct DevCheckInstance {
  std::string function;
  SitePath site;
  std::string pattern;
  BugKind kind = BugKind::misalignment;
  SuppressionCatalog::Position position = SuppressionCatalog::Position::pre;
  bool in_constructor = false;
};

std::optional<AccessEvidence> access_in_function(const FunctionIR& fn,
                                                 const FunctionRecord& rec,
                                                 const ConversionPair& pair,
                                                 const UnsafeApiCatalog& apis,
                                                 BugKind kind);

std::optional<AccessEvidence> accessible_to_caller(const FunctionIR& fn,
                                                   const FunctionRecord& rec,
                                                   const ConversionPair& pair);

// Scans the function plus, interprocedurally, its direct callers, callees and
// the constructors of the types involved.
std::vector<DevCheckInstance> collect_dev_checks(const PropertyGraph& graph,
                                                 const PackageIR& pkg,
                                                 const FunctionRecord& rec,
                                                 const ConversionPair& pair,
                                                 const SuppressionCatalog& checks,
                                                 bool interprocedural);

// True when a direct caller performs the exact inverse conversion, i.e. the
// pointer round-trips back to its original type.
bool caller_round_trip(const PropertyGraph& graph, const FunctionRecord& rec,
                       const ConversionPair& pair);

struct VerificationResult {
  std::vector<BugReport> reports;

  struct Dropped {
    Finding finding;
    std::string reason;
    std::optional<Suppression> suppression;
  };
  std::vector<Dropped> dropped;
};

VerificationResult verify_function(const PropertyGraph& graph,
                                   const PackageIR& pkg,
                                   const FunctionRecord& rec,
                                   std::vector<Finding> findings,
                                   const TraitMap& traits,
                                   const UnsafeApiCatalog& apis,
                                   const SuppressionCatalog& checks,
                                   bool interprocedural);

}  // namespace typesift
