#pragma once

// The three conversion checks. Each takes one conversion pair plus the
// candidate set for its generic side (ignored for concrete-to-concrete) and
// yields at most one finding. Generic scenarios either mark outright when the
// candidate set is unconstrained, or substitute every candidate and re-run
// the concrete rule; when several candidates mark, the lexicographically
// smallest canonical name becomes the witness.

#include <optional>
#include <string>
#include <vector>

#include "typesift/property_graph.hpp"
#include "typesift/type_semantics.hpp"

namespace typesift {

enum class BugKind { misalignment, inconsistent_layout, mismatched_scope };

const char* bug_kind_name(BugKind k);     // "misalignment", ...
const char* bug_kind_numeral(BugKind k);  // "I", "II", "III"

struct Finding {
  BugKind kind = BugKind::misalignment;
  ConversionPair pair;
  std::optional<TypeDescriptor> witness;  // marking candidate, generic scenarios
  std::string rule_id;
  std::vector<ArchWidth> failing_arches;  // misalignment only
};

struct DetectorContext {
  const PackageIR* pkg = nullptr;
  std::vector<ArchWidth> arches{ArchWidth::bits32, ArchWidth::bits64};
};

// Type I. Concrete rule: src alignment not divisible by dst alignment on an
// enabled architecture. Unconstrained ConGen always marks; unconstrained
// GenCon marks unless the destination provably aligns to 1.
std::optional<Finding> check_misalignment(const ConversionPair& pair,
                                          const CandidateTypeSet& ty_set,
                                          const DetectorContext& ctx);

// Type II. Concrete rule: unstable src to stable dst, two unstable types with
// different ABI identities, or a padding-bearing c-representation src read as
// a scalar. Unconstrained ConGen marks for unstable sources; unconstrained
// GenCon marks (any source can disagree with the concrete destination).
std::optional<Finding> check_inconsistent_layout(const ConversionPair& pair,
                                                 const CandidateTypeSet& ty_set,
                                                 const DetectorContext& ctx);

// Type III. Concrete rule: weak src to strict dst, or strict src to a weak
// destination behind a mutable pointer. Unknown pattern classes mark only
// under unconstrained sets (weak as source, strict as destination).
std::optional<Finding> check_mismatched_scope(const ConversionPair& pair,
                                              const CandidateTypeSet& ty_set,
                                              const DetectorContext& ctx);

// Two unstable-layout types share an ABI identity iff their names agree.
bool abi_compatible(const TypeDescriptor& a, const TypeDescriptor& b);

// Replaces every generic node in `ty` with `candidate`.
TypeDescriptor substitute_generic(const TypeDescriptor& ty,
                                  const TypeDescriptor& candidate);

// Runs the enabled detectors over one record's pairs, resolving candidate
// sets from each pair's bounds. Findings keep pair order, then detector order.
std::vector<Finding> run_detectors(const FunctionRecord& record,
                                   const std::vector<BugKind>& enabled,
                                   const TraitMap& traits,
                                   const DetectorContext& ctx);

}  // namespace typesift
