#include "typesift/verification.hpp"

#include <algorithm>
#include <cassert>

#include "json.hpp"

namespace typesift {

namespace {

using nlohmann::json;

unsigned kind_bit(BugKind k) { return 1u << static_cast<unsigned>(k); }

std::string last_segment(const std::string& name) {
  auto pos = name.rfind("::");
  return pos == std::string::npos ? name : name.substr(pos + 2);
}

}  // namespace

const char* evidence_kind_name(EvidenceKind k) {
  switch (k) {
    case EvidenceKind::deref_in_function: return "deref_in_function";
    case EvidenceKind::unsafe_api_argument: return "unsafe_api_argument";
    case EvidenceKind::returned_as_reference: return "returned_as_reference";
  }
  return "?";
}

const char* suppression_reason_name(SuppressionReason r) {
  switch (r) {
    case SuppressionReason::pre_type_check: return "pre_type_check";
    case SuppressionReason::post_type_check: return "post_type_check";
    case SuppressionReason::caller_conversion_chain: return "caller_conversion_chain";
    case SuppressionReason::constructor_guard: return "constructor_guard";
  }
  return "?";
}

void UnsafeApiCatalog::add(const std::string& name,
                           std::initializer_list<BugKind> kinds) {
  unsigned mask = 0;
  for (BugKind k : kinds) mask |= kind_bit(k);
  masks_[name] |= mask;
  masks_[last_segment(name)] |= mask;
}

UnsafeApiCatalog UnsafeApiCatalog::builtin() {
  UnsafeApiCatalog c;
  constexpr auto I = BugKind::misalignment;
  constexpr auto II = BugKind::inconsistent_layout;
  constexpr auto III = BugKind::mismatched_scope;
  for (const char* name : {"ptr::read", "ptr::copy", "ptr::as_ref",
                           "slice::from_raw_parts", "slice::from_raw_parts_mut",
                           "ptr::write"})
    c.add(name, {I, II, III});
  // Encoding-sensitive constructors only matter for scope confusion.
  c.add("str::from_utf8_unchecked", {III});
  c.add("CStr::from_ptr", {III});
  return c;
}

bool UnsafeApiCatalog::is_access(const std::string& callee, BugKind kind,
                                 bool flagged) const {
  if (flagged) return true;
  auto it = masks_.find(callee);
  if (it == masks_.end()) it = masks_.find(last_segment(callee));
  if (it == masks_.end()) return false;
  return (it->second & kind_bit(kind)) != 0;
}

void SuppressionCatalog::add(const std::string& name, BugKind kind,
                             Position position) {
  entries_[name][kind] = position;
  entries_[last_segment(name)][kind] = position;
}

SuppressionCatalog SuppressionCatalog::builtin() {
  SuppressionCatalog c;
  c.add("align_of", BugKind::misalignment, Position::pre);
  c.add("from_size_align", BugKind::misalignment, Position::pre);
  c.add("alloc", BugKind::misalignment, Position::pre);
  c.add("read_unaligned", BugKind::misalignment, Position::post);
  c.add("write_unaligned", BugKind::misalignment, Position::post);
  c.add("size_of", BugKind::inconsistent_layout, Position::pre);
  return c;
}

void SuppressionCatalog::merge_overlay_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(ParseError::Kind::malformed_document, "", e.what());
  }
  if (!doc.is_object())
    throw ParseError(ParseError::Kind::malformed_document, "",
                     "suppression overlay must be an object");
  for (const auto& [name, entry] : doc.items()) {
    if (!entry.is_object())
      throw ParseError(ParseError::Kind::malformed_document, "/" + name,
                       "expected an object of bug-class positions");
    for (const auto& [numeral, pos] : entry.items()) {
      BugKind kind;
      if (numeral == "I") kind = BugKind::misalignment;
      else if (numeral == "II") kind = BugKind::inconsistent_layout;
      else if (numeral == "III") kind = BugKind::mismatched_scope;
      else
        throw ParseError(ParseError::Kind::malformed_document, "/" + name,
                         "unknown bug class '" + numeral + "'");
      if (!pos.is_string() || (pos != "pre" && pos != "post"))
        throw ParseError(ParseError::Kind::malformed_document, "/" + name,
                         "position must be \"pre\" or \"post\"");
      add(name, kind, pos == "pre" ? Position::pre : Position::post);
    }
  }
}

std::vector<std::pair<BugKind, SuppressionCatalog::Position>>
SuppressionCatalog::lookup(const std::string& callee) const {
  auto it = entries_.find(callee);
  if (it == entries_.end()) it = entries_.find(last_segment(callee));
  std::vector<std::pair<BugKind, Position>> out;
  if (it == entries_.end()) return out;
  out.assign(it->second.begin(), it->second.end());
  return out;
}

std::optional<AccessEvidence> access_in_function(const FunctionIR& fn,
                                                 const FunctionRecord& rec,
                                                 const ConversionPair& pair,
                                                 const UnsafeApiCatalog& apis,
                                                 BugKind kind) {
  for (std::size_t b = 0; b < fn.blocks.size(); ++b) {
    const BasicBlock& block = fn.blocks[b];
    for (std::size_t s = 0; s < block.statements.size(); ++s) {
      const Statement& st = block.statements[s];
      if (st.kind != Statement::Kind::assign) continue;
      SitePath here{rec.name, static_cast<BlockId>(b),
                    static_cast<std::uint32_t>(s)};
      if (st.lhs.deref && may_alias(rec.aliases, st.lhs.local, pair.dst_local))
        return AccessEvidence{EvidenceKind::deref_in_function, here, st.lhs.local};
      const Operand& op = st.rvalue.operand;
      if (op.place && op.place->deref &&
          may_alias(rec.aliases, op.place->local, pair.dst_local))
        return AccessEvidence{EvidenceKind::deref_in_function, here,
                              op.place->local};
    }
    const Terminator& term = block.terminator;
    if (term.kind == Terminator::Kind::call &&
        apis.is_access(term.callee, kind, term.is_unsafe_api)) {
      for (const Operand& arg : term.args) {
        if (arg.place &&
            may_alias(rec.aliases, arg.place->local, pair.dst_local))
          return AccessEvidence{
              EvidenceKind::unsafe_api_argument,
              {rec.name, static_cast<BlockId>(b),
               static_cast<std::uint32_t>(block.statements.size())},
              arg.place->local};
      }
    }
  }
  return std::nullopt;
}

std::optional<AccessEvidence> accessible_to_caller(const FunctionIR& fn,
                                                   const FunctionRecord& rec,
                                                   const ConversionPair& pair) {
  // Raw-pointer returns do not count: the caller still needs unsafe to touch
  // them.
  if (rec.return_type.kind != TypeDescriptor::Kind::reference)
    return std::nullopt;
  if (!may_alias(rec.aliases, 0, pair.dst_local)) return std::nullopt;
  SitePath site = pair.site;
  for (std::size_t b = 0; b < fn.blocks.size(); ++b) {
    if (fn.blocks[b].terminator.kind == Terminator::Kind::ret) {
      site = {rec.name, static_cast<BlockId>(b),
              static_cast<std::uint32_t>(fn.blocks[b].statements.size())};
      break;
    }
  }
  return AccessEvidence{EvidenceKind::returned_as_reference, site, 0};
}

std::vector<DevCheckInstance> collect_dev_checks(const PropertyGraph& graph,
                                                 const PackageIR& pkg,
                                                 const FunctionRecord& rec,
                                                 const ConversionPair& pair,
                                                 const SuppressionCatalog& checks,
                                                 bool interprocedural) {
  // name -> scanned as a constructor of one of the involved types
  std::map<std::string, bool> reachable;
  reachable.emplace(rec.name, false);
  if (interprocedural) {
    for (const auto& caller : callers_of(rec.name, graph))
      reachable.emplace(caller, false);
    for (const auto& callee : callees_of(rec.name, graph))
      reachable.emplace(callee, false);
    std::vector<std::string> ctors;
    if (pair.src.kind == TypeDescriptor::Kind::aggregate) {
      auto found = find_constructors(pair.src, graph);
      ctors.insert(ctors.end(), found.begin(), found.end());
    }
    if (rec.method_of) {
      auto found =
          find_constructors(TypeDescriptor::aggregate(*rec.method_of), graph);
      ctors.insert(ctors.end(), found.begin(), found.end());
    }
    for (const auto& ctor : ctors) reachable.emplace(ctor, true);
  }

  std::vector<DevCheckInstance> out;
  for (const auto& [name, in_constructor] : reachable) {
    const FunctionIR* fn = pkg.function(name);
    if (!fn) continue;
    for (std::size_t b = 0; b < fn->blocks.size(); ++b) {
      const Terminator& term = fn->blocks[b].terminator;
      if (term.kind != Terminator::Kind::call) continue;
      for (auto [kind, position] : checks.lookup(term.callee)) {
        DevCheckInstance inst;
        inst.function = name;
        inst.site = {name, static_cast<BlockId>(b),
                     static_cast<std::uint32_t>(fn->blocks[b].statements.size())};
        inst.pattern = term.callee;
        inst.kind = kind;
        inst.position = position;
        inst.in_constructor = in_constructor;
        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

bool caller_round_trip(const PropertyGraph& graph, const FunctionRecord& rec,
                       const ConversionPair& pair) {
  for (const auto& caller : callers_of(rec.name, graph)) {
    auto it = graph.records.find(caller);
    if (it == graph.records.end()) continue;
    for (const ConversionPair& q : it->second.pairs)
      if (q.src == pair.dst && q.dst == pair.src) return true;
  }
  return false;
}

VerificationResult verify_function(const PropertyGraph& graph,
                                   const PackageIR& pkg,
                                   const FunctionRecord& rec,
                                   std::vector<Finding> findings,
                                   const TraitMap& traits,
                                   const UnsafeApiCatalog& apis,
                                   const SuppressionCatalog& checks,
                                   bool interprocedural) {
  VerificationResult result;
  const FunctionIR* fn = pkg.function(rec.name);
  if (!fn) return result;

  for (Finding& finding : findings) {
    const ConversionPair& pair = finding.pair;

    if (interprocedural && caller_round_trip(graph, rec, pair)) {
      result.dropped.push_back(
          {finding,
           suppression_reason_name(SuppressionReason::caller_conversion_chain),
           std::nullopt});
      continue;
    }

    auto evidence = access_in_function(*fn, rec, pair, apis, finding.kind);
    if (!evidence) evidence = accessible_to_caller(*fn, rec, pair);
    if (!evidence) {
      result.dropped.push_back({finding, "no_evidence", std::nullopt});
      continue;
    }

    auto instances =
        collect_dev_checks(graph, pkg, rec, pair, checks, interprocedural);
    std::optional<Suppression> hit;
    std::vector<Suppression> considered;
    for (const DevCheckInstance& inst : instances) {
      Suppression record;
      record.site = inst.site;
      record.pattern = inst.pattern;
      record.reason = inst.in_constructor ? SuppressionReason::constructor_guard
                      : inst.position == SuppressionCatalog::Position::pre
                          ? SuppressionReason::pre_type_check
                          : SuppressionReason::post_type_check;
      if (inst.kind != finding.kind) {
        considered.push_back(std::move(record));
        continue;
      }
      bool applies = true;
      if (!inst.in_constructor && inst.function == rec.name) {
        // Inside the converting function the check has to sit on the right
        // side of the conversion; elsewhere block order carries no meaning.
        applies = inst.position == SuppressionCatalog::Position::pre
                      ? inst.site < pair.site
                      : pair.site < inst.site;
      }
      if (applies) {
        if (!hit) hit = std::move(record);
      } else {
        considered.push_back(std::move(record));
      }
    }

    // A layout-guard bound promises a stable layout before the conversion
    // ever runs.
    if (!hit && finding.kind == BugKind::inconsistent_layout) {
      for (const auto& bound : pair.bounds) {
        if (traits.is_layout_guard(bound)) {
          hit = Suppression{SuppressionReason::pre_type_check, pair.site, bound};
          break;
        }
      }
    }

    if (hit) {
      result.dropped.push_back(
          {finding, suppression_reason_name(hit->reason), hit});
      continue;
    }

    BugReport report;
    report.finding = std::move(finding);
    report.evidence = *evidence;
    report.suppressions_considered = std::move(considered);
    report.package = graph.package;
    report.function = rec.name;
    result.reports.push_back(std::move(report));
  }
  return result;
}

}  // namespace typesift
