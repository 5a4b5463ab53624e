#include "typesift/property_graph.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace typesift {

bool operator<(const SitePath& a, const SitePath& b) {
  if (a.function != b.function) return a.function < b.function;
  if (a.block != b.block) return a.block < b.block;
  return a.statement < b.statement;
}

bool operator==(const SitePath& a, const SitePath& b) {
  return a.function == b.function && a.block == b.block &&
         a.statement == b.statement;
}

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::con_con: return "ConCon";
    case Scenario::con_gen: return "ConGen";
    case Scenario::gen_con: return "GenCon";
  }
  return "?";
}

namespace {

void collect_generic_names(const TypeDescriptor& ty, std::set<std::string>& out) {
  if (ty.kind == TypeDescriptor::Kind::generic) out.insert(ty.name);
  if (ty.inner) collect_generic_names(*ty.inner, out);
}

// Return-type index key: aggregates match by name so that generic arguments
// and Self-normalization do not split the constructor set.
std::string return_key(const TypeDescriptor& ty) {
  if (ty.kind == TypeDescriptor::Kind::aggregate) return "adt:" + ty.name;
  return ty.canonical();
}

TypeDescriptor normalized_return_type(const FunctionIR& fn) {
  // Methods writing their return type as the receiver alias resolve to it.
  if (fn.method_of && fn.return_type.kind == TypeDescriptor::Kind::opaque &&
      fn.return_type.name == "Self")
    return TypeDescriptor::aggregate(*fn.method_of);
  return fn.return_type;
}

}  // namespace

std::vector<ConversionPair> collect_conversion_pairs(const FunctionIR& fn,
                                                     const TraitMap& traits,
                                                     const PackageIR& pkg) {
  bool visible = visibility_of(fn, pkg);
  std::map<std::string, std::set<std::string>> bounds_by_param;
  for (const auto& g : fn.generics)
    bounds_by_param[g.name] = resolve_bounds(g.bounds, traits, pkg, visible);

  std::vector<ConversionPair> pairs;
  for (std::size_t bi = 0; bi < fn.blocks.size(); ++bi) {
    const BasicBlock& block = fn.blocks[bi];
    for (std::size_t si = 0; si < block.statements.size(); ++si) {
      const Statement& st = block.statements[si];
      if (st.kind != Statement::Kind::assign) continue;
      const Rvalue& rv = st.rvalue;
      bool is_conversion = rv.kind == Rvalue::Kind::cast_ptr_to_ptr ||
                           rv.kind == Rvalue::Kind::transmute;
      if (!is_conversion || !rv.src_type || !rv.dst_type) continue;

      const TypeDescriptor& src = rv.src_type->pointee_or_self();
      const TypeDescriptor& dst = rv.dst_type->pointee_or_self();
      bool src_generic = src.contains_generic();
      bool dst_generic = dst.contains_generic();
      if (src_generic && dst_generic) continue;  // Gen->Gen is never stored

      ConversionPair pair;
      pair.src = src;
      pair.dst = dst;
      pair.op = rv.kind == Rvalue::Kind::transmute ? ConversionOp::transmute
                                                   : ConversionOp::cast;
      pair.site = {fn.name, static_cast<BlockId>(bi),
                   static_cast<std::uint32_t>(si)};
      pair.dst_local = st.lhs.local;
      pair.scenario = src_generic ? Scenario::gen_con
                                  : (dst_generic ? Scenario::con_gen
                                                 : Scenario::con_con);
      pair.dst_mutable = rv.dst_type->is_pointer_like() && rv.dst_type->is_mut;
      if (src_generic || dst_generic) {
        std::set<std::string> names;
        collect_generic_names(src_generic ? src : dst, names);
        for (const auto& n : names) {
          auto it = bounds_by_param.find(n);
          if (it != bounds_by_param.end())
            pair.bounds.insert(it->second.begin(), it->second.end());
        }
      }
      pairs.push_back(std::move(pair));
    }
  }
  return pairs;
}

PropertyGraph build_property_graph(const PackageIR& pkg, const TraitMap& traits) {
  std::vector<Violation> violations = validate(pkg);
  if (!violations.empty())
    throw std::invalid_argument("package does not validate: " +
                                violations.front().to_string());

  PropertyGraph g;
  g.package = pkg.name;
  for (const auto& fn : pkg.functions) {
    FunctionRecord rec;
    rec.name = fn.name;
    rec.return_type = normalized_return_type(fn);
    rec.marked_unsafe = fn.contains_unsafe;
    rec.visible = visibility_of(fn, pkg);
    rec.declared_visibility = fn.visibility;
    rec.method_of = fn.method_of;
    rec.pairs = collect_conversion_pairs(fn, traits, pkg);
    for (const auto& gp : fn.generics)
      rec.bounds_by_param[gp.name] = resolve_bounds(gp.bounds, traits, pkg, rec.visible);
    rec.aliases = build_alias_graph(fn);
    g.functions_by_return[return_key(rec.return_type)].push_back(fn.name);
    g.records.emplace(fn.name, std::move(rec));

    for (const auto& block : fn.blocks) {
      if (block.terminator.kind == Terminator::Kind::call)
        g.call_edges.emplace_back(fn.name, block.terminator.callee);
    }
  }
  std::sort(g.call_edges.begin(), g.call_edges.end());
  g.call_edges.erase(std::unique(g.call_edges.begin(), g.call_edges.end()),
                     g.call_edges.end());
  for (auto& [key, fns] : g.functions_by_return) {
    std::sort(fns.begin(), fns.end());
    fns.erase(std::unique(fns.begin(), fns.end()), fns.end());
  }
  return g;
}

std::vector<std::string> find_constructors(const TypeDescriptor& ty,
                                           const PropertyGraph& g) {
  auto it = g.functions_by_return.find(return_key(ty));
  if (it == g.functions_by_return.end()) return {};
  return it->second;
}

std::vector<std::string> callers_of(const std::string& fn, const PropertyGraph& g) {
  std::vector<std::string> out;
  for (const auto& [caller, callee] : g.call_edges)
    if (callee == fn) out.push_back(caller);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> callees_of(const std::string& fn, const PropertyGraph& g) {
  std::vector<std::string> out;
  for (const auto& [caller, callee] : g.call_edges)
    if (caller == fn) out.push_back(callee);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string property_graph_to_json(const PropertyGraph& g) {
  nlohmann::ordered_json j;
  j["package"] = g.package;
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto& [name, rec] : g.records) {
    nlohmann::ordered_json rj;
    rj["function"] = name;
    rj["return_type"] = rec.return_type.canonical();
    rj["marked_unsafe"] = rec.marked_unsafe;
    rj["visible"] = rec.visible;
    if (rec.method_of) rj["method_of"] = *rec.method_of;
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const auto& p : rec.pairs) {
      nlohmann::ordered_json pj;
      pj["src"] = p.src.canonical();
      pj["dst"] = p.dst.canonical();
      pj["operation"] = p.op == ConversionOp::cast ? "cast" : "transmute";
      pj["scenario"] = scenario_name(p.scenario);
      pj["site"] = {{"block", p.site.block}, {"statement", p.site.statement}};
      pj["dst_local"] = p.dst_local;
      pj["dst_mutable"] = p.dst_mutable;
      pj["bounds"] = p.bounds;
      pairs.push_back(std::move(pj));
    }
    rj["conversion_pairs"] = std::move(pairs);
    nlohmann::ordered_json bounds = nlohmann::ordered_json::object();
    for (const auto& [param, set] : rec.bounds_by_param) bounds[param] = set;
    rj["trait_bounds"] = std::move(bounds);
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (const auto& [from, targets] : rec.aliases.adjacency)
      for (LocalId t : targets) edges.push_back({from, t});
    rj["alias_edges"] = std::move(edges);
    records.push_back(std::move(rj));
  }
  j["records"] = std::move(records);
  nlohmann::ordered_json calls = nlohmann::ordered_json::array();
  for (const auto& [caller, callee] : g.call_edges)
    calls.push_back({caller, callee});
  j["call_edges"] = std::move(calls);
  nlohmann::ordered_json index = nlohmann::ordered_json::object();
  for (const auto& [key, fns] : g.functions_by_return) index[key] = fns;
  j["return_type_index"] = std::move(index);
  return j.dump(2) + "\n";
}

}  // namespace typesift
