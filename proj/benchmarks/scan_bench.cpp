// Microbenchmarks over synthetic packages: document parsing, property-graph
// construction, alias reachability and the end-to-end scan.

#include <benchmark/benchmark.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "typesift/alias_graph.hpp"
#include "typesift/property_graph.hpp"
#include "typesift/scan.hpp"

namespace {

using nlohmann::json;

json prim(const char* name) { return {{"kind", "primitive"}, {"name", name}}; }

json ptr_to(json pointee, bool mut = false) {
  return {{"kind", "raw_ptr"}, {"mutable", mut}, {"pointee", std::move(pointee)}};
}

// Each function casts a u8 pointer to u16, reads through it and forwards it,
// giving the analysis one conversion pair, alias edges and a call edge.
std::string synthetic_package_json(unsigned functions) {
  json pkg;
  pkg["name"] = "bench";
  pkg["functions"] = json::array();
  for (unsigned i = 0; i < functions; ++i) {
    json fn;
    fn["name"] = "fn_" + std::to_string(i);
    fn["visibility"] = "public";
    fn["contains_unsafe"] = true;
    fn["generics"] = json::array();
    fn["params"] = json::array({{{"local", 1}, {"type", ptr_to(prim("u8"))}}});
    fn["return_type"] = prim("u64");
    fn["locals"] = json::array({
        {{"id", 0}, {"type", prim("u64")}},
        {{"id", 1}, {"type", ptr_to(prim("u8"))}},
        {{"id", 2}, {"type", ptr_to(prim("u16"))}},
        {{"id", 3}, {"type", prim("u16")}},
    });
    json cast = {{"kind", "assign"},
                 {"lhs", {{"local", 2}}},
                 {"rvalue",
                  {{"kind", "cast_ptr_to_ptr"},
                   {"operand", {{"mode", "copy"}, {"local", 1}}},
                   {"src_type", ptr_to(prim("u8"))},
                   {"dst_type", ptr_to(prim("u16"))}}}};
    json deref = {{"kind", "assign"},
                  {"lhs", {{"local", 3}}},
                  {"rvalue",
                   {{"kind", "use"},
                    {"operand", {{"mode", "copy"}, {"local", 2}, {"deref", true}}}}}};
    json call = {{"kind", "call"},
                 {"callee", "fn_" + std::to_string((i + 1) % functions)},
                 {"args", json::array({{{"mode", "copy"}, {"local", 1}}})},
                 {"dest", 0}};
    fn["blocks"] = json::array(
        {{{"statements", json::array({cast, deref})}, {"terminator", call}},
         {{"statements", json::array()},
          {"terminator", {{"kind", "return"}}}}});
    pkg["functions"].push_back(std::move(fn));
  }
  pkg["aggregates"] = json::object();
  pkg["traits"] = json::object();
  return pkg.dump();
}

void BM_parse_package(benchmark::State& state) {
  const std::string text = synthetic_package_json(
      static_cast<unsigned>(state.range(0)));
  for (auto _ : state) {
    auto pkg = typesift::parse_package(text);
    benchmark::DoNotOptimize(pkg);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(text.size()));
}

void BM_build_property_graph(benchmark::State& state) {
  const auto pkg = typesift::parse_package(
      synthetic_package_json(static_cast<unsigned>(state.range(0))));
  const auto traits = typesift::TraitMap::builtin();
  for (auto _ : state) {
    auto graph = typesift::build_property_graph(pkg, traits);
    benchmark::DoNotOptimize(graph);
  }
}

void BM_descendants(benchmark::State& state) {
  typesift::AliasGraph g;
  const auto n = static_cast<typesift::LocalId>(state.range(0));
  for (typesift::LocalId i = 0; i + 1 < n; ++i) g.insert_edge(i, i + 1);
  for (auto _ : state) {
    auto reach = typesift::descendants(g, 0);
    benchmark::DoNotOptimize(reach);
  }
}

void BM_full_scan(benchmark::State& state) {
  const auto path = std::filesystem::temp_directory_path() / "typesift_bench.json";
  {
    std::ofstream out(path);
    out << synthetic_package_json(static_cast<unsigned>(state.range(0)));
  }
  typesift::ScanConfig cfg;
  cfg.inputs = {path.string()};
  for (auto _ : state) {
    auto summary = typesift::run_scan(cfg);
    benchmark::DoNotOptimize(summary);
  }
  std::filesystem::remove(path);
}

}  // namespace

BENCHMARK(BM_parse_package)->Arg(8)->Arg(64);
BENCHMARK(BM_build_property_graph)->Arg(8)->Arg(64);
BENCHMARK(BM_descendants)->Arg(16)->Arg(256);
BENCHMARK(BM_full_scan)->Arg(32);

BENCHMARK_MAIN();
