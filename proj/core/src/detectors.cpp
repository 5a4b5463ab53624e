#include "typesift/detectors.hpp"

#include <cassert>

namespace typesift {

const char* bug_kind_name(BugKind k) {
  switch (k) {
    case BugKind::misalignment: return "misalignment";
    case BugKind::inconsistent_layout: return "inconsistent_layout";
    case BugKind::mismatched_scope: return "mismatched_scope";
  }
  return "?";
}

const char* bug_kind_numeral(BugKind k) {
  switch (k) {
    case BugKind::misalignment: return "I";
    case BugKind::inconsistent_layout: return "II";
    case BugKind::mismatched_scope: return "III";
  }
  return "?";
}

TypeDescriptor substitute_generic(const TypeDescriptor& ty,
                                  const TypeDescriptor& candidate) {
  if (ty.kind == TypeDescriptor::Kind::generic) return candidate;
  TypeDescriptor out = ty;
  if (ty.inner)
    out.inner = std::make_shared<const TypeDescriptor>(
        substitute_generic(*ty.inner, candidate));
  return out;
}

bool abi_compatible(const TypeDescriptor& a, const TypeDescriptor& b) {
  return a.canonical() == b.canonical();
}

namespace {

std::string rule_id(BugKind kind, Scenario scenario, const std::string& pattern) {
  std::string prefix;
  switch (kind) {
    case BugKind::misalignment: prefix = "T1"; break;
    case BugKind::inconsistent_layout: prefix = "T2"; break;
    case BugKind::mismatched_scope: prefix = "T3"; break;
  }
  return prefix + "-" + scenario_name(scenario) + "-" + pattern;
}

// ---------------------------------------------------------------------------
// Type I
// ---------------------------------------------------------------------------

// Architectures where src's alignment is not a multiple of dst's. Unknown
// alignments never satisfy the concrete rule.
std::vector<ArchWidth> misaligned_arches(const TypeDescriptor& src,
                                         const TypeDescriptor& dst,
                                         const DetectorContext& ctx) {
  std::vector<ArchWidth> failing;
  for (ArchWidth arch : ctx.arches) {
    auto sa = alignment_of(src, arch, *ctx.pkg);
    auto da = alignment_of(dst, arch, *ctx.pkg);
    if (!sa || !da) continue;
    if (*da != 0 && *sa % *da != 0) failing.push_back(arch);
  }
  return failing;
}

// ---------------------------------------------------------------------------
// Type II
// ---------------------------------------------------------------------------

std::optional<std::string> layout_mark(const TypeDescriptor& src,
                                       const TypeDescriptor& dst,
                                       const PackageIR& pkg) {
  LayoutClass src_cls = layout_class(src, pkg);
  LayoutClass dst_cls = layout_class(dst, pkg);
  if (src_cls == LayoutClass::unstable) {
    if (dst_cls == LayoutClass::stable) return "unstable-to-stable";
    if (!abi_compatible(src, dst)) return "unstable-abi";
    return std::nullopt;
  }
  // Stable but padded sources leak their padding bytes into scalar views.
  if (padding_bearing(src, pkg) && dst_cls == LayoutClass::stable &&
      dst.kind != TypeDescriptor::Kind::aggregate)
    return "padding-exposure";
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Type III
// ---------------------------------------------------------------------------

std::optional<std::string> scope_mark(const TypeDescriptor& src,
                                      const TypeDescriptor& dst, bool dst_mutable,
                                      const PackageIR& pkg) {
  auto src_cls = pattern_class(src, pkg);
  auto dst_cls = pattern_class(dst, pkg);
  if (!src_cls || !dst_cls) return std::nullopt;
  if (*src_cls == PatternClass::weak && *dst_cls == PatternClass::strict)
    return "weak-to-strict";
  if (*src_cls == PatternClass::strict && *dst_cls == PatternClass::weak &&
      dst_mutable)
    return "strict-mutweak";
  return std::nullopt;
}

}  // namespace

std::optional<Finding> check_misalignment(const ConversionPair& pair,
                                          const CandidateTypeSet& ty_set,
                                          const DetectorContext& ctx) {
  assert(ctx.pkg);
  Finding f;
  f.kind = BugKind::misalignment;
  f.pair = pair;

  switch (pair.scenario) {
    case Scenario::con_con: {
      auto failing = misaligned_arches(pair.src, pair.dst, ctx);
      if (failing.empty()) return std::nullopt;
      f.rule_id = rule_id(f.kind, pair.scenario, "align-mod");
      f.failing_arches = std::move(failing);
      return f;
    }
    case Scenario::con_gen: {
      if (ty_set.unconstrained) {
        // Nothing restricts the destination: any stricter alignment fits.
        f.rule_id = rule_id(f.kind, pair.scenario, "unconstrained");
        return f;
      }
      for (const auto& candidate : ty_set.types) {
        TypeDescriptor dst = substitute_generic(pair.dst, candidate);
        auto failing = misaligned_arches(pair.src, dst, ctx);
        if (!failing.empty()) {
          f.rule_id = rule_id(f.kind, pair.scenario, "align-mod");
          f.witness = candidate;
          f.failing_arches = std::move(failing);
          return f;
        }
      }
      return std::nullopt;
    }
    case Scenario::gen_con: {
      if (ty_set.unconstrained) {
        // Marks unless the destination provably aligns to one byte.
        std::vector<ArchWidth> failing;
        for (ArchWidth arch : ctx.arches) {
          auto da = alignment_of(pair.dst, arch, *ctx.pkg);
          if (!da || *da != 1) failing.push_back(arch);
        }
        if (failing.empty()) return std::nullopt;
        f.rule_id = rule_id(f.kind, pair.scenario, "unconstrained");
        f.failing_arches = std::move(failing);
        return f;
      }
      for (const auto& candidate : ty_set.types) {
        TypeDescriptor src = substitute_generic(pair.src, candidate);
        auto failing = misaligned_arches(src, pair.dst, ctx);
        if (!failing.empty()) {
          f.rule_id = rule_id(f.kind, pair.scenario, "align-mod");
          f.witness = candidate;
          f.failing_arches = std::move(failing);
          return f;
        }
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<Finding> check_inconsistent_layout(const ConversionPair& pair,
                                                 const CandidateTypeSet& ty_set,
                                                 const DetectorContext& ctx) {
  assert(ctx.pkg);
  const PackageIR& pkg = *ctx.pkg;
  Finding f;
  f.kind = BugKind::inconsistent_layout;
  f.pair = pair;

  switch (pair.scenario) {
    case Scenario::con_con: {
      auto pattern = layout_mark(pair.src, pair.dst, pkg);
      if (!pattern) return std::nullopt;
      f.rule_id = rule_id(f.kind, pair.scenario, *pattern);
      return f;
    }
    case Scenario::con_gen: {
      if (ty_set.unconstrained) {
        if (layout_class(pair.src, pkg) != LayoutClass::unstable)
          return std::nullopt;
        f.rule_id = rule_id(f.kind, pair.scenario, "unconstrained");
        return f;
      }
      for (const auto& candidate : ty_set.types) {
        TypeDescriptor dst = substitute_generic(pair.dst, candidate);
        auto pattern = layout_mark(pair.src, dst, pkg);
        if (pattern) {
          f.rule_id = rule_id(f.kind, pair.scenario, *pattern);
          f.witness = candidate;
          return f;
        }
      }
      return std::nullopt;
    }
    case Scenario::gen_con: {
      if (ty_set.unconstrained) {
        // The source may be any layout: stable destinations can be fed from
        // unstable sources, unstable destinations from differently-named ones.
        f.rule_id = rule_id(f.kind, pair.scenario, "unconstrained");
        return f;
      }
      for (const auto& candidate : ty_set.types) {
        TypeDescriptor src = substitute_generic(pair.src, candidate);
        auto pattern = layout_mark(src, pair.dst, pkg);
        if (pattern) {
          f.rule_id = rule_id(f.kind, pair.scenario, *pattern);
          f.witness = candidate;
          return f;
        }
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<Finding> check_mismatched_scope(const ConversionPair& pair,
                                              const CandidateTypeSet& ty_set,
                                              const DetectorContext& ctx) {
  assert(ctx.pkg);
  const PackageIR& pkg = *ctx.pkg;
  Finding f;
  f.kind = BugKind::mismatched_scope;
  f.pair = pair;

  switch (pair.scenario) {
    case Scenario::con_con: {
      auto pattern = scope_mark(pair.src, pair.dst, pair.dst_mutable, pkg);
      if (!pattern) return std::nullopt;
      f.rule_id = rule_id(f.kind, pair.scenario, *pattern);
      return f;
    }
    case Scenario::con_gen: {
      if (ty_set.unconstrained) {
        auto src_cls = pattern_class(pair.src, pkg);
        // Unknown sources count as weak under an unconstrained set.
        if (!src_cls || *src_cls == PatternClass::weak) {
          f.rule_id = rule_id(f.kind, pair.scenario, "unconstrained-weak");
          return f;
        }
        if (*src_cls == PatternClass::strict && pair.dst_mutable) {
          f.rule_id = rule_id(f.kind, pair.scenario, "unconstrained-strict-mut");
          return f;
        }
        return std::nullopt;
      }
      for (const auto& candidate : ty_set.types) {
        TypeDescriptor dst = substitute_generic(pair.dst, candidate);
        auto pattern = scope_mark(pair.src, dst, pair.dst_mutable, pkg);
        if (pattern) {
          f.rule_id = rule_id(f.kind, pair.scenario, *pattern);
          f.witness = candidate;
          return f;
        }
      }
      return std::nullopt;
    }
    case Scenario::gen_con: {
      if (ty_set.unconstrained) {
        auto dst_cls = pattern_class(pair.dst, pkg);
        // Unknown destinations count as strict under an unconstrained set.
        if (!dst_cls || *dst_cls == PatternClass::strict) {
          f.rule_id = rule_id(f.kind, pair.scenario, "unconstrained-strict");
          return f;
        }
        if (*dst_cls == PatternClass::weak && pair.dst_mutable) {
          f.rule_id = rule_id(f.kind, pair.scenario, "unconstrained-mutweak");
          return f;
        }
        return std::nullopt;
      }
      for (const auto& candidate : ty_set.types) {
        TypeDescriptor src = substitute_generic(pair.src, candidate);
        auto pattern = scope_mark(src, pair.dst, pair.dst_mutable, pkg);
        if (pattern) {
          f.rule_id = rule_id(f.kind, pair.scenario, *pattern);
          f.witness = candidate;
          return f;
        }
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::vector<Finding> run_detectors(const FunctionRecord& record,
                                   const std::vector<BugKind>& enabled,
                                   const TraitMap& traits,
                                   const DetectorContext& ctx) {
  std::vector<Finding> findings;
  for (const auto& pair : record.pairs) {
    CandidateTypeSet ty_set;
    if (pair.scenario != Scenario::con_con)
      ty_set = candidate_types(pair.bounds, traits);
    for (BugKind kind : enabled) {
      std::optional<Finding> f;
      switch (kind) {
        case BugKind::misalignment:
          f = check_misalignment(pair, ty_set, ctx);
          break;
        case BugKind::inconsistent_layout:
          f = check_inconsistent_layout(pair, ty_set, ctx);
          break;
        case BugKind::mismatched_scope:
          f = check_mismatched_scope(pair, ty_set, ctx);
          break;
      }
      if (f) findings.push_back(std::move(*f));
    }
  }
  return findings;
}

}  // namespace typesift
