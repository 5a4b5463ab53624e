#pragma once

#include <array>
#include <string>
#include <vector>

#include "typesift/verification.hpp"

namespace typesift {

enum class OutputFormat { text, json };

enum class PackageStatus { ok, timeout, parse_error };

const char* package_status_name(PackageStatus s);

struct ScanConfig {
  std::vector<std::string> inputs;
  std::vector<BugKind> detectors;  // defaults to I, II, III
  std::vector<ArchWidth> arches;   // defaults to both widths
  bool interprocedural = true;
  unsigned jobs = 1;
  double per_package_timeout_s = 120.0;
  OutputFormat format = OutputFormat::text;
  bool dump_alias_dot = false;
  bool dump_property_graph = false;
  TraitMap traits = TraitMap::builtin();
  SuppressionCatalog checks = SuppressionCatalog::builtin();
  UnsafeApiCatalog apis = UnsafeApiCatalog::builtin();

  ScanConfig();
};

struct PackageResult {
  std::string input_path;
  std::string package;  // empty when the document never parsed
  PackageStatus status = PackageStatus::ok;
  std::string error;
  double elapsed_s = 0.0;  // never rendered: output stays byte-stable
  std::vector<BugReport> reports;
  std::vector<VerificationResult::Dropped> dropped;
  std::string debug_dump;
};

struct ScanSummary {
  std::vector<PackageResult> packages;  // input order regardless of jobs
  std::array<std::size_t, 3> totals{};  // indexed by BugKind
};

// Parses and analyzes every input. A package that fails to parse or runs past
// the per-package deadline is reported with the matching status and never
// disturbs the other inputs.
ScanSummary run_scan(const ScanConfig& cfg);

std::string render_report(const ScanSummary& summary, OutputFormat format);

// 2 when anything failed to parse, 1 when any report was produced, else 0.
int exit_code_for(const ScanSummary& summary);

}  // namespace typesift
