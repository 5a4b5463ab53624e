// Command-line driver: parses flags, loads overlays, runs the scan and
// prints the rendered report on stdout. Debug dumps go to stderr so piping
// the report stays clean.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "typesift/scan.hpp"

namespace {

int fail_usage(const std::string& message) {
  std::cerr << "typesift: " << message << "\n";
  return 2;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream buf;
  buf << in.rdbuf();
  out = buf.str();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Type-confusion detector for pointer conversions in IR documents"};

  std::vector<std::string> inputs;
  std::string detectors = "I,II,III";
  std::string arch = "both";
  bool no_interprocedural = false;
  unsigned jobs = 1;
  double timeout_s = 120.0;
  std::string format = "text";
  bool dump_alias_dot = false;
  bool dump_property_graph = false;
  std::string trait_overlay;
  std::string suppression_overlay;

  app.add_option("--input", inputs, "IR document to scan (repeatable)")
      ->required();
  app.add_option("--detectors", detectors,
                 "Comma-separated subset of I,II,III (default all)");
  app.add_option("--arch", arch, "Alignment widths: 32, 64 or both")
      ->check(CLI::IsMember({"32", "64", "both"}));
  app.add_flag("--no-interprocedural", no_interprocedural,
               "Disable caller/callee/constructor refinement");
  app.add_option("--jobs", jobs, "Parallel package workers")
      ->check(CLI::PositiveNumber);
  app.add_option("--timeout", timeout_s, "Per-package budget in seconds")
      ->check(CLI::PositiveNumber);
  app.add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_flag("--dump-alias-dot", dump_alias_dot,
               "Write per-function alias graphs in dot form to stderr");
  app.add_flag("--dump-property-graph", dump_property_graph,
               "Write the package property graph as JSON to stderr");
  app.add_option("--trait-overlay", trait_overlay,
                 "JSON file adding trait implementor sets");
  app.add_option("--suppression-overlay", suppression_overlay,
                 "JSON file adding developer-check patterns");

  CLI11_PARSE(app, argc, argv);

  typesift::ScanConfig cfg;
  cfg.inputs = inputs;
  cfg.interprocedural = !no_interprocedural;
  cfg.jobs = jobs;
  cfg.per_package_timeout_s = timeout_s;
  cfg.format = format == "json" ? typesift::OutputFormat::json
                                : typesift::OutputFormat::text;
  cfg.dump_alias_dot = dump_alias_dot;
  cfg.dump_property_graph = dump_property_graph;

  cfg.detectors.clear();
  std::stringstream det(detectors);
  std::string token;
  while (std::getline(det, token, ',')) {
    if (token == "I")
      cfg.detectors.push_back(typesift::BugKind::misalignment);
    else if (token == "II")
      cfg.detectors.push_back(typesift::BugKind::inconsistent_layout);
    else if (token == "III")
      cfg.detectors.push_back(typesift::BugKind::mismatched_scope);
    else if (!token.empty())
      return fail_usage("unknown detector '" + token + "'");
  }
  if (cfg.detectors.empty()) return fail_usage("no detectors selected");

  cfg.arches.clear();
  if (arch == "32" || arch == "both")
    cfg.arches.push_back(typesift::ArchWidth::bits32);
  if (arch == "64" || arch == "both")
    cfg.arches.push_back(typesift::ArchWidth::bits64);

  std::string overlay_text;
  if (!trait_overlay.empty()) {
    if (!read_file(trait_overlay, overlay_text))
      return fail_usage("unable to read trait overlay " + trait_overlay);
    try {
      cfg.traits.merge_overlay_json(overlay_text);
    } catch (const typesift::ParseError& e) {
      return fail_usage(std::string("trait overlay: ") + e.what());
    }
  }
  if (!suppression_overlay.empty()) {
    if (!read_file(suppression_overlay, overlay_text))
      return fail_usage("unable to read suppression overlay " +
                        suppression_overlay);
    try {
      cfg.checks.merge_overlay_json(overlay_text);
    } catch (const typesift::ParseError& e) {
      return fail_usage(std::string("suppression overlay: ") + e.what());
    }
  }

  typesift::ScanSummary summary = typesift::run_scan(cfg);

  for (const auto& pkg : summary.packages)
    if (!pkg.debug_dump.empty()) std::cerr << pkg.debug_dump;

  std::cout << typesift::render_report(summary, cfg.format);
  return typesift::exit_code_for(summary);
}
