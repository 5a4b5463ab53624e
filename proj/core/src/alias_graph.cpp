#include "typesift/alias_graph.hpp"

#include <deque>
#include <sstream>

namespace typesift {

void AliasGraph::insert_edge(LocalId from, LocalId to) {
  adjacency[from].insert(to);
  adjacency.try_emplace(to);
}

void AliasGraph::erase_edge(LocalId from, LocalId to) {
  auto it = adjacency.find(from);
  if (it != adjacency.end()) it->second.erase(to);
}

void AliasGraph::erase_edges_from(LocalId from) {
  auto it = adjacency.find(from);
  if (it != adjacency.end()) it->second.clear();
}

std::size_t AliasGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& [from, targets] : adjacency) n += targets.size();
  return n;
}

AliasGraph build_alias_graph(const FunctionIR& fn) {
  AliasGraph g;
  for (const auto& local : fn.locals) g.adjacency.try_emplace(local.id);

  auto apply_operand_edge = [&g](LocalId lhs, const Operand& op) {
    if (!op.place) return;  // constants contribute nothing
    g.insert_edge(lhs, op.place->local);
    // A move consumes the operand: the just-inserted edge goes away again,
    // while older aliases of the moved-from local stay intact.
    if (op.mode == OperandMode::move_) g.erase_edge(lhs, op.place->local);
  };

  for (const auto& block : fn.blocks) {
    for (const auto& st : block.statements) {
      if (st.kind == Statement::Kind::storage_dead) {
        g.erase_edges_from(st.dead);
        continue;
      }
      switch (st.rvalue.kind) {
        case Rvalue::Kind::ref_of:
        case Rvalue::Kind::raw_ptr_of:
        case Rvalue::Kind::cast_ptr_to_ptr:
        case Rvalue::Kind::transmute:
          apply_operand_edge(st.lhs.local, st.rvalue.operand);
          break;
        case Rvalue::Kind::use_of:
          break;
      }
    }
    if (block.terminator.kind == Terminator::Kind::call) {
      for (const auto& arg : block.terminator.args)
        apply_operand_edge(block.terminator.dest, arg);
    }
  }
  return g;
}

std::set<LocalId> descendants(const AliasGraph& g, LocalId start) {
  if (!g.has_node(start))
    throw std::out_of_range("alias graph has no local " + std::to_string(start));
  std::set<LocalId> seen;
  std::deque<LocalId> queue{start};
  while (!queue.empty()) {
    LocalId cur = queue.front();
    queue.pop_front();
    auto it = g.adjacency.find(cur);
    if (it == g.adjacency.end()) continue;
    for (LocalId next : it->second) {
      if (seen.insert(next).second) queue.push_back(next);
    }
  }
  return seen;
}

bool may_alias(const AliasGraph& g, LocalId a, LocalId b) {
  std::set<LocalId> da = descendants(g, a);
  da.insert(a);
  std::set<LocalId> db = descendants(g, b);
  db.insert(b);
  for (LocalId x : da)
    if (db.count(x)) return true;
  return false;
}

std::string to_dot(const AliasGraph& g, const std::string& fn_name) {
  std::ostringstream os;
  os << "digraph \"" << fn_name << "\" {\n";
  for (const auto& [node, targets] : g.adjacency) {
    os << "  _" << node << ";\n";
    for (LocalId t : targets) os << "  _" << node << " -> _" << t << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace typesift
