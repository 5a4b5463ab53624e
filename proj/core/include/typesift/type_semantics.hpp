#pragma once

// Type facts the detectors consume: per-architecture alignment and size,
// layout stability, bit-pattern strictness, trait-bound resolution and the
// candidate sets a generic parameter may instantiate to.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "typesift/ir.hpp"

namespace typesift {

enum class ArchWidth { bits32, bits64 };

// Layout identity across compilations / monomorphizations.
enum class LayoutClass { stable, unstable };

// Constraint a type places on its bit patterns. Types outside both classes
// (generics, unhinted opaques) resolve to nullopt, handled per detector rule.
enum class PatternClass { weak, strict };

// Trait name -> known implementors. Built-ins cover the standard marker
// traits (every primitive implements them); layout-guard entries admit only
// types with initialized, stable layout. A JSON overlay can add entries.
class TraitMap {
 public:
  struct Entry {
    std::vector<TypeDescriptor> implementors;
    bool layout_guard = false;
  };

  static TraitMap builtin();

  bool contains(const std::string& trait) const;
  bool is_layout_guard(const std::string& trait) const;
  const Entry* entry(const std::string& trait) const;
  void add(const std::string& trait, Entry entry);

  // Overlay document: {"TraitName": {"implementors": [types...],
  // "layout_guard": bool?, "supertraits": [...]?}} -- the traits-table shape.
  void merge_overlay_json(const std::string& document);

 private:
  std::map<std::string, Entry> entries_;
};

struct CandidateTypeSet {
  std::vector<TypeDescriptor> types;  // sorted by canonical name, deduplicated
  // True when the bounds give no usable constraint (empty, or none of the
  // names is in the trait map): the generic may be anything.
  bool unconstrained = true;
};

// Byte alignment under the given pointer width. Opaque symbols go through
// extract_external_type_hint; generics and unhinted opaques are unknown.
std::optional<unsigned> alignment_of(const TypeDescriptor& ty, ArchWidth arch,
                                     const PackageIR& pkg);

// Byte size where statically known (str, slices and unhinted externals are
// not). Used for zero-size and c-representation padding decisions.
std::optional<std::uint64_t> size_of_type(const TypeDescriptor& ty, ArchWidth arch,
                                          const PackageIR& pkg);

// Longest primitive-name token embedded in the symbol's final "::" segment;
// leftmost occurrence wins ties. "external::u8_bytes" -> u8.
std::optional<std::string> extract_external_type_hint(std::string_view symbol);

LayoutClass layout_class(const TypeDescriptor& ty, const PackageIR& pkg);

// c-representation aggregates whose sequential layout inserts padding bytes
// (checked on either architecture; unknown field sizes count as padding).
bool padding_bearing(const TypeDescriptor& ty, const PackageIR& pkg);

std::optional<PatternClass> pattern_class(const TypeDescriptor& ty,
                                          const PackageIR& pkg);

// Resolves one bound list: names in the trait map are kept; unknown names
// with supertraits are expanded recursively while `visible` holds (cycle-safe);
// everything else is kept verbatim.
std::set<std::string> resolve_bounds(const std::vector<std::string>& bounds,
                                     const TraitMap& traits, const PackageIR& pkg,
                                     bool visible);

// Union of resolve_bounds over every generic parameter in the signature.
std::set<std::string> get_trait_bounds(const FunctionIR& fn, const TraitMap& traits,
                                       const PackageIR& pkg, bool visible);

// Intersection of implementor sets over the bounds found in the trait map,
// plus one synthetic padded aggregate unless a layout-guard bound is present.
CandidateTypeSet candidate_types(const std::set<std::string>& bounds,
                                 const TraitMap& traits);

// True when external users can both call the function and construct the
// receiver (public function; for methods, the receiver aggregate and all of
// its fields must be externally constructible, recursively).
bool visibility_of(const FunctionIR& fn, const PackageIR& pkg);

// The padded composite candidate substituted for otherwise-unconstrained
// generics: { a: u8, b: u16, c: u8 } with default representation.
const AggregateDef& synthetic_padded_aggregate();
// Resolves through the package first, then the synthetic table.
const AggregateDef* resolve_aggregate_or_synthetic(std::string_view name,
                                                   const PackageIR& pkg);

const char* arch_name(ArchWidth arch);

}  // namespace typesift
