#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "typesift/alias_graph.hpp"

using namespace typesift;

namespace {

FunctionIR skeleton(LocalId nlocals) {
  FunctionIR fn;
  fn.name = "f";
  fn.return_type = TypeDescriptor::primitive("u8");
  for (LocalId i = 0; i < nlocals; ++i)
    fn.locals.push_back({i, TypeDescriptor::primitive("u8")});
  return fn;
}

Statement alias_stmt(LocalId lhs, LocalId src, Rvalue::Kind kind, bool moved) {
  Statement st;
  st.lhs.local = lhs;
  st.rvalue.kind = kind;
  st.rvalue.operand.mode = moved ? OperandMode::move_ : OperandMode::copy_;
  st.rvalue.operand.place = Place{src, false};
  if (kind == Rvalue::Kind::cast_ptr_to_ptr || kind == Rvalue::Kind::transmute) {
    st.rvalue.src_type =
        TypeDescriptor::raw_pointer(TypeDescriptor::primitive("u8"), false);
    st.rvalue.dst_type =
        TypeDescriptor::raw_pointer(TypeDescriptor::primitive("u16"), false);
  }
  return st;
}

Statement kill_stmt(LocalId local) {
  Statement st;
  st.kind = Statement::Kind::storage_dead;
  st.dead = local;
  return st;
}

}  // namespace

TEST_CASE("edge-producing rvalues") {
  FunctionIR fn = skeleton(4);
  BasicBlock bb;
  bb.statements.push_back(alias_stmt(1, 0, Rvalue::Kind::ref_of, false));
  bb.statements.push_back(alias_stmt(2, 1, Rvalue::Kind::raw_ptr_of, false));
  bb.statements.push_back(alias_stmt(3, 2, Rvalue::Kind::cast_ptr_to_ptr, false));
  fn.blocks.push_back(bb);
  AliasGraph g = build_alias_graph(fn);
  CHECK(g.edge_count() == 3);
  CHECK(descendants(g, 3) == std::set<LocalId>{0, 1, 2});
  CHECK(may_alias(g, 3, 0));
  CHECK(may_alias(g, 0, 3));
}

TEST_CASE("use never creates an edge") {
  FunctionIR fn = skeleton(2);
  BasicBlock bb;
  Statement st;
  st.lhs.local = 1;
  st.rvalue.kind = Rvalue::Kind::use_of;
  st.rvalue.operand.place = Place{0, false};
  bb.statements.push_back(st);
  fn.blocks.push_back(bb);
  CHECK(build_alias_graph(fn).edge_count() == 0);
}

TEST_CASE("moves erase the edge they would create, even a pre-existing one") {
  FunctionIR fn = skeleton(3);
  BasicBlock bb;
  bb.statements.push_back(alias_stmt(2, 1, Rvalue::Kind::ref_of, false));
  bb.statements.push_back(alias_stmt(2, 1, Rvalue::Kind::transmute, true));
  fn.blocks.push_back(bb);
  AliasGraph g = build_alias_graph(fn);
  CHECK(g.edge_count() == 0);

  // A move of a different local leaves unrelated edges alone.
  fn.blocks[0].statements[1] = alias_stmt(2, 0, Rvalue::Kind::transmute, true);
  g = build_alias_graph(fn);
  CHECK(descendants(g, 2) == std::set<LocalId>{1});
}

TEST_CASE("storage_dead erases outgoing edges only") {
  FunctionIR fn = skeleton(3);
  BasicBlock bb;
  bb.statements.push_back(alias_stmt(1, 0, Rvalue::Kind::ref_of, false));
  bb.statements.push_back(alias_stmt(2, 1, Rvalue::Kind::ref_of, false));
  bb.statements.push_back(kill_stmt(1));
  fn.blocks.push_back(bb);
  AliasGraph g = build_alias_graph(fn);
  CHECK(descendants(g, 1).empty());
  CHECK(descendants(g, 2) == std::set<LocalId>{1});  // incoming edge survives
  CHECK_FALSE(may_alias(g, 2, 0));
}

TEST_CASE("call arguments flow into the destination") {
  FunctionIR fn = skeleton(4);
  BasicBlock bb;
  bb.terminator.kind = Terminator::Kind::call;
  bb.terminator.callee = "ext::f";
  bb.terminator.dest = 3;
  Operand a;
  a.place = Place{1, false};
  Operand b;
  b.mode = OperandMode::move_;
  b.place = Place{2, false};
  Operand c;
  c.mode = OperandMode::constant;
  bb.terminator.args = {a, b, c};
  fn.blocks.push_back(bb);
  AliasGraph g = build_alias_graph(fn);
  CHECK(descendants(g, 3) == std::set<LocalId>{1});  // move and const drop out
}

TEST_CASE("descendants rejects unknown locals") {
  FunctionIR fn = skeleton(2);
  AliasGraph g = build_alias_graph(fn);
  CHECK_THROWS_AS(descendants(g, 9), std::out_of_range);
  CHECK(may_alias(g, 1, 1));  // isolated locals still alias themselves
}

TEST_CASE("cycles terminate and include the start") {
  AliasGraph g;
  g.insert_edge(0, 1);
  g.insert_edge(1, 2);
  g.insert_edge(2, 0);
  CHECK(descendants(g, 0) == std::set<LocalId>{0, 1, 2});
}

TEST_CASE("dot rendering lists nodes and edges") {
  AliasGraph g;
  g.insert_edge(2, 1);
  std::string dot = to_dot(g, "fn");
  CHECK(dot.find("digraph \"fn\"") != std::string::npos);
  CHECK(dot.find("_2 -> _1;") != std::string::npos);
}

// ---------------------------------------------------------------------------
// Randomized equivalence with a brute-force closure oracle. The generator
// emits the same event stream both as IR fed to build_alias_graph and as
// plain edge-set mutations.
// ---------------------------------------------------------------------------

namespace {

struct Oracle {
  std::set<std::pair<LocalId, LocalId>> edges;

  void alias(LocalId lhs, LocalId src, bool moved) {
    edges.insert({lhs, src});
    if (moved) edges.erase({lhs, src});
  }
  void kill(LocalId local) {
    for (auto it = edges.begin(); it != edges.end();)
      it = it->first == local ? edges.erase(it) : std::next(it);
  }

  std::set<LocalId> reach(LocalId start, LocalId n) const {
    std::set<LocalId> seen;
    std::vector<LocalId> queue{start};
    while (!queue.empty()) {
      LocalId cur = queue.back();
      queue.pop_back();
      for (LocalId next = 0; next < n; ++next) {
        if (edges.count({cur, next}) && seen.insert(next).second)
          queue.push_back(next);
      }
    }
    return seen;
  }
};

}  // namespace

TEST_CASE("random event streams agree with the closure oracle") {
  std::mt19937 rng(77002);
  const Rvalue::Kind kinds[] = {Rvalue::Kind::ref_of, Rvalue::Kind::raw_ptr_of,
                                Rvalue::Kind::cast_ptr_to_ptr,
                                Rvalue::Kind::transmute};
  for (int round = 0; round < 120; ++round) {
    LocalId n = 2 + rng() % 11;  // up to 12 locals
    FunctionIR fn = skeleton(n);
    Oracle oracle;
    BasicBlock bb;
    int events = 3 + rng() % 20;
    for (int e = 0; e < events; ++e) {
      switch (rng() % 4) {
        case 0:
        case 1: {
          LocalId lhs = rng() % n;
          LocalId src = rng() % n;
          bool moved = rng() % 3 == 0;
          bb.statements.push_back(
              alias_stmt(lhs, src, kinds[rng() % 4], moved));
          oracle.alias(lhs, src, moved);
          break;
        }
        case 2: {
          LocalId dead = rng() % n;
          bb.statements.push_back(kill_stmt(dead));
          oracle.kill(dead);
          break;
        }
        default: {
          // Flush into a call-terminated block.
          bb.terminator.kind = Terminator::Kind::call;
          bb.terminator.callee = "ext::sink";
          LocalId dest = rng() % n;
          bb.terminator.dest = dest;
          int nargs = 1 + rng() % 2;
          for (int a = 0; a < nargs; ++a) {
            Operand op;
            bool moved = rng() % 3 == 0;
            op.mode = moved ? OperandMode::move_ : OperandMode::copy_;
            LocalId src = rng() % n;
            op.place = Place{src, false};
            bb.terminator.args.push_back(op);
            oracle.alias(dest, src, moved);
          }
          fn.blocks.push_back(bb);
          bb = BasicBlock{};
          break;
        }
      }
    }
    fn.blocks.push_back(bb);

    AliasGraph g = build_alias_graph(fn);
    for (LocalId a = 0; a < n; ++a) {
      CHECK(descendants(g, a) == oracle.reach(a, n));
      for (LocalId b = 0; b < n; ++b) {
        auto ra = oracle.reach(a, n);
        ra.insert(a);
        auto rb = oracle.reach(b, n);
        rb.insert(b);
        bool expect = false;
        for (LocalId x : ra) expect = expect || rb.count(x) != 0;
        CHECK(may_alias(g, a, b) == expect);
        CHECK(may_alias(g, a, b) == may_alias(g, b, a));
      }
    }
  }
}
