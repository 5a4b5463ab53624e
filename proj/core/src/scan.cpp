#include "typesift/scan.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"

namespace typesift {

namespace {

using nlohmann::ordered_json;
using steady = std::chrono::steady_clock;

PackageResult analyze_one(const std::string& path, const ScanConfig& cfg) {
  PackageResult res;
  res.input_path = path;
  const auto start = steady::now();
  const auto deadline =
      start + std::chrono::duration_cast<steady::duration>(
                  std::chrono::duration<double>(cfg.per_package_timeout_s));
  auto out_of_time = [&] { return steady::now() >= deadline; };
  auto finish = [&] {
    res.elapsed_s = std::chrono::duration<double>(steady::now() - start).count();
  };
  auto timed_out = [&] {
    res.status = PackageStatus::timeout;
    res.reports.clear();
    res.dropped.clear();
    res.debug_dump.clear();
    finish();
  };

  std::ifstream in(path, std::ios::binary);
  if (!in) {
    res.status = PackageStatus::parse_error;
    res.error = "unable to read file";
    finish();
    return res;
  }
  std::ostringstream buf;
  buf << in.rdbuf();

  PackageIR pkg;
  try {
    pkg = parse_package(buf.str());
  } catch (const ParseError& e) {
    res.status = PackageStatus::parse_error;
    res.error = e.what();
    finish();
    return res;
  }
  res.package = pkg.name;
  if (out_of_time()) {
    timed_out();
    return res;
  }

  PropertyGraph graph = build_property_graph(pkg, cfg.traits);
  if (out_of_time()) {
    timed_out();
    return res;
  }

  DetectorContext ctx;
  ctx.pkg = &pkg;
  ctx.arches = cfg.arches;

  for (const auto& [name, record] : graph.records) {
    if (out_of_time()) {
      timed_out();
      return res;
    }
    auto findings = run_detectors(record, cfg.detectors, cfg.traits, ctx);
    auto verified =
        verify_function(graph, pkg, record, std::move(findings), cfg.traits,
                        cfg.apis, cfg.checks, cfg.interprocedural);
    for (auto& r : verified.reports) res.reports.push_back(std::move(r));
    for (auto& d : verified.dropped) res.dropped.push_back(std::move(d));
  }

  if (cfg.dump_alias_dot)
    for (const auto& [name, record] : graph.records)
      res.debug_dump += to_dot(record.aliases, name) + "\n";
  if (cfg.dump_property_graph) res.debug_dump += property_graph_to_json(graph);

  finish();
  return res;
}

bool report_before(const BugReport& a, const BugReport& b) {
  return std::make_tuple(std::cref(a.package), std::cref(a.function),
                         a.finding.pair.site.block, a.finding.pair.site.statement,
                         static_cast<int>(a.finding.kind),
                         std::cref(a.finding.rule_id)) <
         std::make_tuple(std::cref(b.package), std::cref(b.function),
                         b.finding.pair.site.block, b.finding.pair.site.statement,
                         static_cast<int>(b.finding.kind),
                         std::cref(b.finding.rule_id));
}

std::string site_str(BlockId block, std::uint32_t statement) {
  return "bb" + std::to_string(block) + "[" + std::to_string(statement) + "]";
}

ordered_json site_json(BlockId block, std::uint32_t statement) {
  ordered_json j;
  j["block"] = block;
  j["statement"] = statement;
  return j;
}

std::string render_json(const ScanSummary& summary) {
  ordered_json doc;
  doc["packages"] = ordered_json::array();
  for (const auto& p : summary.packages) {
    ordered_json entry;
    entry["package"] = p.package;
    entry["input"] = p.input_path;
    entry["status"] = package_status_name(p.status);
    doc["packages"].push_back(std::move(entry));
  }

  std::vector<const BugReport*> reports;
  for (const auto& p : summary.packages)
    for (const auto& r : p.reports) reports.push_back(&r);
  std::sort(reports.begin(), reports.end(),
            [](const BugReport* a, const BugReport* b) {
              return report_before(*a, *b);
            });

  doc["reports"] = ordered_json::array();
  for (const BugReport* r : reports) {
    const Finding& f = r->finding;
    ordered_json j;
    j["package"] = r->package;
    j["function"] = r->function;
    j["bug_type"] = bug_kind_numeral(f.kind);
    j["rule_id"] = f.rule_id;
    j["conversion_site"] = site_json(f.pair.site.block, f.pair.site.statement);
    j["operation"] = f.pair.op == ConversionOp::cast ? "cast" : "transmute";
    j["src_type"] = f.pair.src.canonical();
    j["dst_type"] = f.pair.dst.canonical();
    if (f.witness)
      j["witness"] = f.witness->canonical();
    else
      j["witness"] = nullptr;
    j["failing_arches"] = ordered_json::array();
    for (ArchWidth a : f.failing_arches) j["failing_arches"].push_back(arch_name(a));
    ordered_json ev;
    ev["kind"] = evidence_kind_name(r->evidence.kind);
    ev["site"] = site_json(r->evidence.site.block, r->evidence.site.statement);
    j["evidence"] = std::move(ev);
    j["suppressions_considered"] = ordered_json::array();
    for (const Suppression& s : r->suppressions_considered) {
      ordered_json sj;
      sj["reason"] = suppression_reason_name(s.reason);
      sj["function"] = s.site.function;
      sj["block"] = s.site.block;
      sj["statement"] = s.site.statement;
      sj["pattern"] = s.pattern;
      j["suppressions_considered"].push_back(std::move(sj));
    }
    doc["reports"].push_back(std::move(j));
  }

  ordered_json totals;
  totals["I"] = summary.totals[0];
  totals["II"] = summary.totals[1];
  totals["III"] = summary.totals[2];
  doc["totals"] = std::move(totals);
  return doc.dump(2) + "\n";
}

std::string render_text(const ScanSummary& summary) {
  std::ostringstream out;
  for (const auto& p : summary.packages) {
    out << "package " << (p.package.empty() ? "?" : p.package) << " ("
        << p.input_path << "): " << package_status_name(p.status) << "\n";
    if (!p.error.empty()) out << "  error: " << p.error << "\n";

    std::vector<const BugReport*> reports;
    for (const auto& r : p.reports) reports.push_back(&r);
    std::sort(reports.begin(), reports.end(),
              [](const BugReport* a, const BugReport* b) {
                return report_before(*a, *b);
              });
    for (const BugReport* r : reports) {
      const Finding& f = r->finding;
      out << "  [" << bug_kind_numeral(f.kind) << "] " << f.rule_id << " in "
          << r->function << "\n";
      out << "    conversion: "
          << (f.pair.op == ConversionOp::cast ? "cast" : "transmute") << " at "
          << site_str(f.pair.site.block, f.pair.site.statement) << ": "
          << f.pair.src.canonical() << " -> " << f.pair.dst.canonical() << "\n";
      out << "    evidence: " << evidence_kind_name(r->evidence.kind) << " at "
          << site_str(r->evidence.site.block, r->evidence.site.statement)
          << "\n";
      if (f.witness) out << "    witness: " << f.witness->canonical() << "\n";
      if (!f.failing_arches.empty()) {
        out << "    arches:";
        for (std::size_t i = 0; i < f.failing_arches.size(); ++i)
          out << (i ? ", " : " ") << arch_name(f.failing_arches[i]);
        out << "\n";
      }
      for (const Suppression& s : r->suppressions_considered)
        out << "    considered: " << suppression_reason_name(s.reason) << " "
            << s.pattern << " in " << s.site.function << " at "
            << site_str(s.site.block, s.site.statement) << "\n";
    }
  }
  std::size_t n = summary.totals[0] + summary.totals[1] + summary.totals[2];
  out << n << (n == 1 ? " finding" : " findings") << "\n";
  return out.str();
}

}  // namespace

const char* package_status_name(PackageStatus s) {
  switch (s) {
    case PackageStatus::ok: return "ok";
    case PackageStatus::timeout: return "timeout";
    case PackageStatus::parse_error: return "parse_error";
  }
  return "?";
}

ScanConfig::ScanConfig()
    : detectors{BugKind::misalignment, BugKind::inconsistent_layout,
                BugKind::mismatched_scope},
      arches{ArchWidth::bits32, ArchWidth::bits64} {}

ScanSummary run_scan(const ScanConfig& cfg) {
  ScanSummary summary;
  const std::size_t n = cfg.inputs.size();
  summary.packages.resize(n);

  std::size_t jobs = std::max<unsigned>(1, cfg.jobs);
  jobs = std::min(jobs, std::max<std::size_t>(1, n));

  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      summary.packages[i] = analyze_one(cfg.inputs[i], cfg);
  } else {
    // Workers pull the next input index; slot i always holds input i, so the
    // merged summary never depends on scheduling.
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        summary.packages[i] = analyze_one(cfg.inputs[i], cfg);
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& p : summary.packages)
    for (const auto& r : p.reports)
      ++summary.totals[static_cast<std::size_t>(r.finding.kind)];
  return summary;
}

std::string render_report(const ScanSummary& summary, OutputFormat format) {
  return format == OutputFormat::json ? render_json(summary)
                                      : render_text(summary);
}

int exit_code_for(const ScanSummary& summary) {
  for (const auto& p : summary.packages)
    if (p.status == PackageStatus::parse_error) return 2;
  std::size_t n = summary.totals[0] + summary.totals[1] + summary.totals[2];
  return n > 0 ? 1 : 0;
}

}  // namespace typesift
