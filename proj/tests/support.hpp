#pragma once

// Shared helpers for the test binaries: fixture paths, file IO, and a tiny
// wrapper that runs the whole pipeline on one fixture.

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "typesift/scan.hpp"

namespace testsupport {

inline std::string fixture_path(const std::string& name) {
  return std::string(TYPESIFT_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline typesift::ScanSummary scan_fixture(const std::string& name,
                                          bool interprocedural = true) {
  typesift::ScanConfig cfg;
  cfg.inputs = {fixture_path(name)};
  cfg.format = typesift::OutputFormat::json;
  cfg.interprocedural = interprocedural;
  return typesift::run_scan(cfg);
}

inline std::array<std::size_t, 3> kind_counts(const typesift::ScanSummary& s) {
  return s.totals;
}

}  // namespace testsupport
