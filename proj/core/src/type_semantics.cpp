#include "typesift/type_semantics.hpp"

#include <algorithm>

#include "json.hpp"
#include "json_codec.hpp"

namespace typesift {

namespace {

unsigned word_bytes(ArchWidth arch) { return arch == ArchWidth::bits32 ? 4 : 8; }

std::optional<unsigned> primitive_alignment(const std::string& name, ArchWidth arch) {
  if (name == "bool" || name == "u8" || name == "i8" || name == "str") return 1u;
  if (name == "u16" || name == "i16") return 2u;
  if (name == "char" || name == "u32" || name == "i32" || name == "f32") return 4u;
  if (name == "u64" || name == "i64" || name == "f64") return 8u;
  if (name == "u128" || name == "i128") return 16u;
  if (name == "usize" || name == "isize") return word_bytes(arch);
  return std::nullopt;
}

std::optional<std::uint64_t> primitive_size(const std::string& name, ArchWidth arch) {
  if (name == "str") return std::nullopt;  // unsized
  if (name == "bool" || name == "u8" || name == "i8") return 1u;
  if (name == "u16" || name == "i16") return 2u;
  if (name == "char" || name == "u32" || name == "i32" || name == "f32") return 4u;
  if (name == "u64" || name == "i64" || name == "f64") return 8u;
  if (name == "u128" || name == "i128") return 16u;
  if (name == "usize" || name == "isize") return word_bytes(arch);
  return std::nullopt;
}

std::uint64_t round_up(std::uint64_t value, std::uint64_t align) {
  if (align == 0) return value;
  std::uint64_t rem = value % align;
  return rem == 0 ? value : value + (align - rem);
}

struct LayoutOracle {
  ArchWidth arch;
  const PackageIR& pkg;
  std::set<std::string> visiting;

  std::optional<unsigned> align(const TypeDescriptor& ty) {
    switch (ty.kind) {
      case TypeDescriptor::Kind::primitive:
        return primitive_alignment(ty.name, arch);
      case TypeDescriptor::Kind::raw_pointer:
      case TypeDescriptor::Kind::reference:
        return word_bytes(arch);
      case TypeDescriptor::Kind::slice:
      case TypeDescriptor::Kind::array:
        return ty.inner ? align(*ty.inner) : std::nullopt;
      case TypeDescriptor::Kind::generic:
        return std::nullopt;
      case TypeDescriptor::Kind::opaque: {
        auto hint = extract_external_type_hint(ty.name);
        if (!hint) return std::nullopt;
        return primitive_alignment(*hint, arch);
      }
      case TypeDescriptor::Kind::aggregate: {
        const AggregateDef* def = resolve_aggregate_or_synthetic(ty.name, pkg);
        if (!def) return std::nullopt;
        if (!visiting.insert(ty.name).second) return std::nullopt;
        std::optional<unsigned> best = 1u;  // empty aggregates align to 1
        for (const auto& f : def->fields) {
          auto fa = align(f.type);
          if (!fa) {
            best = std::nullopt;
            break;
          }
          best = std::max(*best, *fa);
        }
        visiting.erase(ty.name);
        return best;
      }
    }
    return std::nullopt;
  }

  std::optional<std::uint64_t> size(const TypeDescriptor& ty) {
    switch (ty.kind) {
      case TypeDescriptor::Kind::primitive:
        return primitive_size(ty.name, arch);
      case TypeDescriptor::Kind::raw_pointer:
      case TypeDescriptor::Kind::reference:
        return word_bytes(arch);
      case TypeDescriptor::Kind::slice:
        return std::nullopt;  // unsized
      case TypeDescriptor::Kind::array: {
        if (ty.length == 0) return 0u;
        if (!ty.inner) return std::nullopt;
        auto es = size(*ty.inner);
        if (!es) return std::nullopt;
        return *es * ty.length;
      }
      case TypeDescriptor::Kind::generic:
        return std::nullopt;
      case TypeDescriptor::Kind::opaque: {
        auto hint = extract_external_type_hint(ty.name);
        if (!hint) return std::nullopt;
        return primitive_size(*hint, arch);
      }
      case TypeDescriptor::Kind::aggregate: {
        const AggregateDef* def = resolve_aggregate_or_synthetic(ty.name, pkg);
        if (!def) return std::nullopt;
        if (!visiting.insert(ty.name).second) return std::nullopt;
        std::optional<std::uint64_t> result = aggregate_size(*def);
        visiting.erase(ty.name);
        return result;
      }
    }
    return std::nullopt;
  }

  std::optional<std::uint64_t> aggregate_size(const AggregateDef& def) {
    if (def.fields.empty()) return 0u;
    if (def.repr == AggregateRepr::transparent) {
      std::uint64_t total = 0;
      for (const auto& f : def.fields) {
        if (is_zero_sized(f.type, pkg)) continue;
        auto fs = size(f.type);
        if (!fs) return std::nullopt;
        total += *fs;
      }
      return total;
    }
    if (def.repr == AggregateRepr::c) {
      std::uint64_t offset = 0;
      std::uint64_t max_align = 1;
      for (const auto& f : def.fields) {
        auto fa = align(f.type);
        auto fs = size(f.type);
        if (!fa || !fs) return std::nullopt;
        max_align = std::max<std::uint64_t>(max_align, *fa);
        offset = round_up(offset, *fa) + *fs;
      }
      return round_up(offset, max_align);
    }
    // Default representation: field order is unspecified, so only the
    // all-zero-sized case has a known size.
    bool all_zero = true;
    for (const auto& f : def.fields) all_zero = all_zero && is_zero_sized(f.type, pkg);
    if (all_zero) return 0u;
    return std::nullopt;
  }
};

}  // namespace

const char* arch_name(ArchWidth arch) {
  return arch == ArchWidth::bits32 ? "32-bit" : "64-bit";
}

const AggregateDef& synthetic_padded_aggregate() {
  static const AggregateDef def = [] {
    AggregateDef d;
    d.name = "synthetic::Padded";
    d.repr = AggregateRepr::default_;
    d.visibility = Visibility::public_;
    d.fields = {
        {"a", TypeDescriptor::primitive("u8"), Visibility::public_},
        {"b", TypeDescriptor::primitive("u16"), Visibility::public_},
        {"c", TypeDescriptor::primitive("u8"), Visibility::public_},
    };
    return d;
  }();
  return def;
}

const AggregateDef* resolve_aggregate_or_synthetic(std::string_view name,
                                                   const PackageIR& pkg) {
  if (const AggregateDef* def = resolve_aggregate(name, pkg)) return def;
  if (name == synthetic_padded_aggregate().name)
    return &synthetic_padded_aggregate();
  return nullptr;
}

std::optional<unsigned> alignment_of(const TypeDescriptor& ty, ArchWidth arch,
                                     const PackageIR& pkg) {
  LayoutOracle oracle{arch, pkg, {}};
  return oracle.align(ty);
}

std::optional<std::uint64_t> size_of_type(const TypeDescriptor& ty, ArchWidth arch,
                                          const PackageIR& pkg) {
  LayoutOracle oracle{arch, pkg, {}};
  return oracle.size(ty);
}

std::optional<std::string> extract_external_type_hint(std::string_view symbol) {
  std::size_t cut = symbol.rfind("::");
  std::string_view segment =
      cut == std::string_view::npos ? symbol : symbol.substr(cut + 2);
  std::optional<std::string> best;
  std::size_t best_pos = 0;
  for (const auto& prim : primitive_names()) {
    std::size_t pos = segment.find(prim);
    while (pos != std::string_view::npos) {
      bool better = !best || prim.size() > best->size() ||
                    (prim.size() == best->size() && pos < best_pos);
      if (better) {
        best = prim;
        best_pos = pos;
      }
      pos = segment.find(prim, pos + 1);
    }
  }
  return best;
}

namespace {

LayoutClass layout_class_impl(const TypeDescriptor& ty, const PackageIR& pkg,
                              std::set<std::string>& visiting) {
  switch (ty.kind) {
    case TypeDescriptor::Kind::primitive:
    case TypeDescriptor::Kind::raw_pointer:
    case TypeDescriptor::Kind::reference:
      return LayoutClass::stable;
    case TypeDescriptor::Kind::slice:
    case TypeDescriptor::Kind::array:
      return ty.inner ? layout_class_impl(*ty.inner, pkg, visiting)
                      : LayoutClass::unstable;
    case TypeDescriptor::Kind::generic:
    case TypeDescriptor::Kind::opaque:
      return LayoutClass::unstable;  // conservative
    case TypeDescriptor::Kind::aggregate: {
      const AggregateDef* def = resolve_aggregate_or_synthetic(ty.name, pkg);
      if (!def) return LayoutClass::unstable;
      if (is_zero_sized(ty, pkg)) return LayoutClass::stable;
      if (!visiting.insert(ty.name).second) return LayoutClass::unstable;
      LayoutClass result = LayoutClass::unstable;
      switch (def->repr) {
        case AggregateRepr::default_:
          result = LayoutClass::unstable;
          break;
        case AggregateRepr::c:
          result = LayoutClass::stable;
          break;
        case AggregateRepr::transparent: {
          result = LayoutClass::stable;
          for (const auto& f : def->fields) {
            if (is_zero_sized(f.type, pkg)) continue;
            result = layout_class_impl(f.type, pkg, visiting);
            break;
          }
          break;
        }
      }
      visiting.erase(ty.name);
      return result;
    }
  }
  return LayoutClass::unstable;
}

bool padding_bearing_impl(const TypeDescriptor& ty, const PackageIR& pkg,
                          ArchWidth arch, std::set<std::string>& visiting) {
  if (ty.kind != TypeDescriptor::Kind::aggregate) return false;
  const AggregateDef* def = resolve_aggregate_or_synthetic(ty.name, pkg);
  if (!def) return false;
  if (!visiting.insert(ty.name).second) return false;
  bool result = false;
  if (def->repr == AggregateRepr::transparent) {
    for (const auto& f : def->fields) {
      if (is_zero_sized(f.type, pkg)) continue;
      result = padding_bearing_impl(f.type, pkg, arch, visiting);
      break;
    }
  } else if (def->repr == AggregateRepr::c) {
    LayoutOracle oracle{arch, pkg, {}};
    std::optional<std::uint64_t> total = oracle.size(ty);
    std::uint64_t field_sum = 0;
    bool unknown = !total;
    for (const auto& f : def->fields) {
      auto fs = oracle.size(f.type);
      if (!fs) {
        unknown = true;
        break;
      }
      field_sum += *fs;
    }
    // Unknown pieces are treated as padding-bearing to stay conservative.
    result = unknown || *total > field_sum;
  }
  visiting.erase(ty.name);
  return result;
}

std::optional<PatternClass> pattern_class_impl(const TypeDescriptor& ty,
                                               const PackageIR& pkg,
                                               std::set<std::string>& visiting) {
  switch (ty.kind) {
    case TypeDescriptor::Kind::primitive:
      if (ty.name == "bool" || ty.name == "char" || ty.name == "str")
        return PatternClass::strict;
      return PatternClass::weak;
    case TypeDescriptor::Kind::reference:
      return PatternClass::strict;
    case TypeDescriptor::Kind::raw_pointer:
      return PatternClass::weak;
    case TypeDescriptor::Kind::slice:
    case TypeDescriptor::Kind::array:
      return ty.inner ? pattern_class_impl(*ty.inner, pkg, visiting) : std::nullopt;
    case TypeDescriptor::Kind::generic:
    case TypeDescriptor::Kind::opaque:
      return std::nullopt;
    case TypeDescriptor::Kind::aggregate: {
      const AggregateDef* def = resolve_aggregate_or_synthetic(ty.name, pkg);
      if (!def) return std::nullopt;
      if (is_zero_sized(ty, pkg)) return PatternClass::weak;
      if (!visiting.insert(ty.name).second) return PatternClass::weak;
      bool any_unknown = false;
      std::optional<PatternClass> result = PatternClass::weak;
      for (const auto& f : def->fields) {
        auto fc = pattern_class_impl(f.type, pkg, visiting);
        if (!fc)
          any_unknown = true;
        else if (*fc == PatternClass::strict) {
          result = PatternClass::strict;
          break;
        }
      }
      if (result != PatternClass::strict && any_unknown) result = std::nullopt;
      visiting.erase(ty.name);
      return result;
    }
  }
  return std::nullopt;
}

}  // namespace

LayoutClass layout_class(const TypeDescriptor& ty, const PackageIR& pkg) {
  std::set<std::string> visiting;
  return layout_class_impl(ty, pkg, visiting);
}

bool padding_bearing(const TypeDescriptor& ty, const PackageIR& pkg) {
  std::set<std::string> visiting;
  if (padding_bearing_impl(ty, pkg, ArchWidth::bits32, visiting)) return true;
  visiting.clear();
  return padding_bearing_impl(ty, pkg, ArchWidth::bits64, visiting);
}

std::optional<PatternClass> pattern_class(const TypeDescriptor& ty,
                                          const PackageIR& pkg) {
  std::set<std::string> visiting;
  return pattern_class_impl(ty, pkg, visiting);
}

// ---------------------------------------------------------------------------
// TraitMap
// ---------------------------------------------------------------------------

TraitMap TraitMap::builtin() {
  TraitMap map;
  Entry all_primitives;
  for (const auto& name : primitive_names())
    all_primitives.implementors.push_back(TypeDescriptor::primitive(name));
  for (const char* marker : {"Copy", "Send", "Sync", "Sized", "'static"})
    map.entries_[marker] = all_primitives;

  // Layout-guard trait: only initialized-stable-layout types qualify, so
  // bit-pattern-restricted primitives (bool, char, str) stay out.
  Entry plain;
  plain.layout_guard = true;
  for (const auto& name : primitive_names()) {
    if (name == "bool" || name == "char" || name == "str") continue;
    plain.implementors.push_back(TypeDescriptor::primitive(name));
  }
  map.entries_["Plain"] = std::move(plain);
  return map;
}

bool TraitMap::contains(const std::string& trait) const {
  return entries_.count(trait) != 0;
}

bool TraitMap::is_layout_guard(const std::string& trait) const {
  auto it = entries_.find(trait);
  return it != entries_.end() && it->second.layout_guard;
}

const TraitMap::Entry* TraitMap::entry(const std::string& trait) const {
  auto it = entries_.find(trait);
  return it == entries_.end() ? nullptr : &it->second;
}

void TraitMap::add(const std::string& trait, Entry entry) {
  entries_[trait] = std::move(entry);
}

void TraitMap::merge_overlay_json(const std::string& document) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseError::Kind::malformed_document, "",
                     std::string("trait overlay: invalid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw ParseError(ParseError::Kind::malformed_document, "",
                     "trait overlay: expected a top-level object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    Entry& entry = entries_[it.key()];
    if (it->contains("layout_guard")) {
      if (!(*it)["layout_guard"].is_boolean())
        throw ParseError(ParseError::Kind::malformed_document,
                         "/" + it.key() + "/layout_guard", "expected a boolean");
      entry.layout_guard = entry.layout_guard || (*it)["layout_guard"].get<bool>();
    }
    if (it->contains("implementors")) {
      const auto& impls = (*it)["implementors"];
      if (!impls.is_array())
        throw ParseError(ParseError::Kind::malformed_document,
                         "/" + it.key() + "/implementors", "expected an array");
      for (std::size_t i = 0; i < impls.size(); ++i) {
        TypeDescriptor ty = detail::parse_type_json(
            impls[i], "/" + it.key() + "/implementors/" + std::to_string(i));
        bool duplicate = false;
        for (const auto& existing : entry.implementors)
          duplicate = duplicate || existing == ty;
        if (!duplicate) entry.implementors.push_back(std::move(ty));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Bounds and candidates
// ---------------------------------------------------------------------------

namespace {

void expand_bounds(const std::vector<std::string>& bounds, const TraitMap& traits,
                   const PackageIR& pkg, bool visible,
                   std::set<std::string>& visited, std::set<std::string>& out) {
  for (const auto& bound : bounds) {
    if (traits.contains(bound)) {
      out.insert(bound);
      continue;
    }
    auto def = pkg.traits.find(bound);
    bool has_supertraits = def != pkg.traits.end() && !def->second.supertraits.empty();
    if (has_supertraits && visible) {
      if (visited.insert(bound).second)
        expand_bounds(def->second.supertraits, traits, pkg, visible, visited, out);
      continue;  // already being expanded elsewhere: cycle, contribute nothing
    }
    out.insert(bound);
  }
}

}  // namespace

std::set<std::string> resolve_bounds(const std::vector<std::string>& bounds,
                                     const TraitMap& traits, const PackageIR& pkg,
                                     bool visible) {
  std::set<std::string> visited;
  std::set<std::string> out;
  expand_bounds(bounds, traits, pkg, visible, visited, out);
  return out;
}

std::set<std::string> get_trait_bounds(const FunctionIR& fn, const TraitMap& traits,
                                       const PackageIR& pkg, bool visible) {
  std::set<std::string> out;
  for (const auto& g : fn.generics) {
    std::set<std::string> resolved = resolve_bounds(g.bounds, traits, pkg, visible);
    out.insert(resolved.begin(), resolved.end());
  }
  return out;
}

CandidateTypeSet candidate_types(const std::set<std::string>& bounds,
                                 const TraitMap& traits) {
  std::vector<const TraitMap::Entry*> known;
  bool layout_guarded = false;
  for (const auto& bound : bounds) {
    const TraitMap::Entry* entry = traits.entry(bound);
    if (!entry) continue;
    known.push_back(entry);
    layout_guarded = layout_guarded || entry->layout_guard;
  }

  CandidateTypeSet result;
  if (known.empty()) {
    result.unconstrained = true;
    return result;
  }
  result.unconstrained = false;

  std::map<std::string, TypeDescriptor> pool;
  for (const auto& ty : known.front()->implementors)
    pool.emplace(ty.canonical(), ty);
  for (std::size_t i = 1; i < known.size(); ++i) {
    std::map<std::string, TypeDescriptor> next;
    for (const auto& ty : known[i]->implementors) {
      auto it = pool.find(ty.canonical());
      if (it != pool.end()) next.insert(*it);
    }
    pool = std::move(next);
  }
  if (!layout_guarded) {
    TypeDescriptor padded =
        TypeDescriptor::aggregate(synthetic_padded_aggregate().name);
    pool.emplace(padded.canonical(), padded);
  }
  for (auto& [key, ty] : pool) result.types.push_back(ty);
  return result;
}

// ---------------------------------------------------------------------------
// Visibility
// ---------------------------------------------------------------------------

namespace {

bool externally_constructible(const TypeDescriptor& ty, const PackageIR& pkg,
                              std::set<std::string>& visiting) {
  switch (ty.kind) {
    case TypeDescriptor::Kind::aggregate: {
      const AggregateDef* def = resolve_aggregate(ty.name, pkg);
      if (!def) return true;  // external types are presumed constructible
      if (!visiting.insert(ty.name).second) return true;
      bool ok = def->visibility == Visibility::public_;
      for (const auto& f : def->fields) {
        ok = ok && f.visibility == Visibility::public_ &&
             externally_constructible(f.type, pkg, visiting);
      }
      visiting.erase(ty.name);
      return ok;
    }
    case TypeDescriptor::Kind::raw_pointer:
    case TypeDescriptor::Kind::reference:
    case TypeDescriptor::Kind::slice:
    case TypeDescriptor::Kind::array:
      return ty.inner ? externally_constructible(*ty.inner, pkg, visiting) : true;
    default:
      return true;
  }
}

}  // namespace

bool visibility_of(const FunctionIR& fn, const PackageIR& pkg) {
  if (fn.visibility != Visibility::public_) return false;
  if (!fn.method_of) return true;
  std::set<std::string> visiting;
  return externally_constructible(TypeDescriptor::aggregate(*fn.method_of), pkg,
                                  visiting);
}

}  // namespace typesift
