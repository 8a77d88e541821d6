#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "fockforge/basis.hpp"
#include "fockforge/builtin_basis.hpp"
#include "fockforge/error.hpp"
#include "fockforge/fock.hpp"
#include "fockforge/graphene.hpp"
#include "fockforge/molecule.hpp"
#include "fockforge/scf.hpp"

namespace fockforge {

inline constexpr std::string_view kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Memory model

/// Asymptotic footprint in bytes, 8-byte elements:
///   replicated    5/2 N^2 R
///   private Fock  (2 + T) N^2 R
///   shared Fock   7/2 N^2 R
/// The serial reference is costed as one replicated rank.
inline std::uint64_t estimate_memory(Strategy s, std::uint64_t n_bf, std::uint64_t ranks_per_node, std::uint64_t threads) {
  if (n_bf == 0 || ranks_per_node == 0 || threads == 0) throw Error("estimate_memory: inputs must be positive");
  const std::uint64_t n2 = n_bf * n_bf;
  switch (s) {
    case Strategy::ReferenceSerial: return 20 * n2;
    case Strategy::Replicated: return 20 * n2 * ranks_per_node;
    case Strategy::PrivateFock: return 8 * (2 + threads) * n2 * ranks_per_node;
    case Strategy::SharedFock: return 28 * n2 * ranks_per_node;
  }
  throw Error("estimate_memory: unknown strategy");
}

// ---------------------------------------------------------------------------
// Inputs

/// Graphene preset name or XYZ path, paired with a builtin basis name or a
/// basis file path.
inline Molecule resolve_system(const std::string& system, const std::string& geometry = "") {
  if (!geometry.empty()) return read_xyz_file(geometry);
  if (const auto* p = find_graphene_preset(system)) return build_graphene_bilayer(p->patch);
  throw Error("unknown system '" + system + "' (expected a preset such as 0.5nm, or --geometry FILE)");
}

inline BasisSpec resolve_basis(const std::string& basis) {
  if (auto b = builtin_basis(basis)) return *b;
  return read_basis_file(basis);
}

enum class ReportFormat { Json, Csv, Table };

inline std::optional<ReportFormat> parse_format(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "table") return ReportFormat::Table;
  return std::nullopt;
}

struct BenchConfig {
  std::string system = "0.5nm";
  std::string geometry;  // overrides system when set
  std::string basis = "6-31g(d)";
  std::vector<Strategy> strategies{Strategy::SharedFock};
  std::vector<int> ranks{1};
  std::vector<int> threads{1};
  Schedule schedule = Schedule::Dynamic;
  double tau = kDefaultScreenThreshold;
  double convergence = 1e-8;
  int max_iterations = 100;
  double damping = 0.0;
  int repetitions = 3;
  ReportFormat format = ReportFormat::Json;

  void validate() const {
    if (strategies.empty() || ranks.empty() || threads.empty()) throw Error("bench: sweep lists must be non-empty");
    if (repetitions < 1) throw Error("bench: repetitions must be at least 1");
    for (int r : ranks)
      if (r < 1) throw Error("bench: rank counts must be positive");
    for (int t : threads)
      if (t < 1 || t > kMaxThreads) throw Error("bench: thread counts must be in 1.." + std::to_string(kMaxThreads));
  }
};

struct BenchCell {
  Strategy strategy = Strategy::SharedFock;
  int ranks = 1, threads = 1;
  Schedule schedule = Schedule::Dynamic;
  double wall_total_s = 0.0;  // SCF iterations; one-time integral setup excluded
  double wall_fock_s = 0.0;
  double wall_diag_s = 0.0;
  int iterations = 0;
  bool converged = false;
  double energy_hartree = 0.0;
  double rms_final = 0.0;
  std::uint64_t est_bytes = 0;
  double speedup = 0.0;
  double efficiency_pct = 0.0;
  std::string error;  // non-empty when the cell failed

  int workers() const noexcept { return ranks * threads; }
};

struct BenchMeta {
  std::string version{kVersion};
  std::string timestamp;
  std::string host;
};

struct BenchReport {
  BenchMeta meta;
  std::vector<BenchCell> cells;

  bool all_converged() const {
    return std::all_of(cells.begin(), cells.end(), [](const BenchCell& c) { return c.error.empty() && c.converged; });
  }
  bool any_failed() const {
    return std::any_of(cells.begin(), cells.end(), [](const BenchCell& c) { return !c.error.empty(); });
  }
  /// Largest energy difference between successful cells.
  double energy_spread() const {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& c : cells) {
      if (!c.error.empty()) continue;
      if (first) lo = hi = c.energy_hartree;
      lo = std::min(lo, c.energy_hartree);
      hi = std::max(hi, c.energy_hartree);
      first = false;
    }
    return hi - lo;
  }
};

inline BenchMeta current_meta() {
  BenchMeta m;
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  m.timestamp = buf;
  char host[256] = {};
  if (gethostname(host, sizeof host - 1) == 0) m.host = host;
  return m;
}

/// Speedup and efficiency against the cell with the fewest workers
/// (ranks x threads) of the same strategy; ties go to the earlier cell.
inline void compute_scaling(std::vector<BenchCell>& cells) {
  for (auto& c : cells) {
    const BenchCell* base = nullptr;
    for (const auto& b : cells)
      if (b.strategy == c.strategy && b.error.empty() && (!base || b.workers() < base->workers())) base = &b;
    if (!base || !c.error.empty() || !(c.wall_total_s > 0.0)) {
      c.speedup = 0.0;
      c.efficiency_pct = 0.0;
      continue;
    }
    if (&c == base) {
      c.speedup = 1.0;
      c.efficiency_pct = 100.0;
      continue;
    }
    c.speedup = base->wall_total_s / c.wall_total_s;
    c.efficiency_pct = base->wall_total_s * base->workers() / (c.wall_total_s * c.workers()) * 100.0;
  }
}

using BenchProgress = std::function<void(const BenchCell&)>;

/// Runs every strategy x ranks x threads cell in sequence. Each cell is
/// repeated and the run with the median total wall time is reported. A
/// failing cell records its error and the sweep continues.
inline BenchReport run_benchmark(const BenchConfig& cfg, const BenchProgress& progress = {}) {
  cfg.validate();
  const Molecule mol = resolve_system(cfg.system, cfg.geometry);
  const BasisSet basis = assign_basis(mol, resolve_basis(cfg.basis));
  const SCFSetup setup(mol, basis);

  BenchReport report;
  report.meta = current_meta();
  for (Strategy s : cfg.strategies)
    for (int r : cfg.ranks)
      for (int t : cfg.threads) {
        BenchCell cell;
        cell.strategy = s;
        cell.ranks = r;
        cell.threads = t;
        cell.schedule = cfg.schedule;
        cell.est_bytes = estimate_memory(s, basis.n_bf(), static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(t));
        SCFConfig sc;
        sc.convergence = cfg.convergence;
        sc.max_iterations = cfg.max_iterations;
        sc.tau = cfg.tau;
        sc.strategy = s;
        sc.schedule = cfg.schedule;
        sc.ranks = r;
        sc.threads = t;
        sc.damping = cfg.damping;
        try {
          std::vector<SCFResult> runs;
          for (int rep = 0; rep < cfg.repetitions; ++rep) {
            auto res = spawn(r, [&](Rank rk) { return scf_iterate(setup, sc, rk); });
            runs.push_back(std::move(res.front()));
          }
          std::sort(runs.begin(), runs.end(),
                    [](const SCFResult& a, const SCFResult& b) { return a.wall_total_s < b.wall_total_s; });
          const SCFResult& m = runs[runs.size() / 2];
          cell.wall_total_s = m.wall_total_s;
          cell.wall_fock_s = m.wall_fock_s;
          cell.wall_diag_s = m.wall_diag_s;
          cell.iterations = m.iterations;
          cell.converged = m.converged;
          cell.energy_hartree = m.total_energy;
          cell.rms_final = m.rms_final;
        } catch (const std::exception& e) {
          cell.error = e.what();
        }
        if (progress) progress(cell);
        report.cells.push_back(std::move(cell));
      }
  compute_scaling(report.cells);
  return report;
}

// ---------------------------------------------------------------------------
// Output

inline constexpr std::array<std::string_view, 14> kReportColumns = {
    "strategy", "ranks",          "threads",   "schedule", "wall_total_s", "wall_fock_s", "wall_diag_s",
    "iterations", "converged", "energy_hartree", "rms_final", "est_bytes", "speedup",     "efficiency_pct"};

inline nlohmann::json to_json(const BenchCell& c) {
  nlohmann::json j = {{"strategy", to_string(c.strategy)},
                      {"ranks", c.ranks},
                      {"threads", c.threads},
                      {"schedule", to_string(c.schedule)},
                      {"wall_total_s", c.wall_total_s},
                      {"wall_fock_s", c.wall_fock_s},
                      {"wall_diag_s", c.wall_diag_s},
                      {"iterations", c.iterations},
                      {"converged", c.converged},
                      {"energy_hartree", c.energy_hartree},
                      {"rms_final", c.rms_final},
                      {"est_bytes", c.est_bytes},
                      {"speedup", c.speedup},
                      {"efficiency_pct", c.efficiency_pct}};
  if (!c.error.empty()) j["error"] = c.error;
  return j;
}

inline nlohmann::json to_json(const BenchReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) cells.push_back(to_json(c));
  return {{"meta", {{"version", r.meta.version}, {"timestamp", r.meta.timestamp}, {"host", r.meta.host}}},
          {"cells", std::move(cells)}};
}

namespace detail {

inline std::string fixed(double v, int prec) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

inline std::vector<std::string> cell_fields(const BenchCell& c) {
  std::ostringstream e;
  e << std::setprecision(12) << c.energy_hartree;
  std::ostringstream rms;
  rms << std::setprecision(3) << std::scientific << c.rms_final;
  return {std::string(to_string(c.strategy)),
          std::to_string(c.ranks),
          std::to_string(c.threads),
          std::string(to_string(c.schedule)),
          fixed(c.wall_total_s, 4),
          fixed(c.wall_fock_s, 4),
          fixed(c.wall_diag_s, 4),
          std::to_string(c.iterations),
          c.converged ? "true" : "false",
          e.str(),
          rms.str(),
          std::to_string(c.est_bytes),
          fixed(c.speedup, 3),
          fixed(c.efficiency_pct, 1)};
}

} // namespace detail

inline std::string emit_report(const BenchReport& r, ReportFormat fmt) {
  std::ostringstream os;
  switch (fmt) {
    case ReportFormat::Json: os << to_json(r).dump(2) << '\n'; break;
    case ReportFormat::Csv: {
      for (std::size_t i = 0; i < kReportColumns.size(); ++i) os << (i ? "," : "") << kReportColumns[i];
      os << '\n';
      for (const auto& c : r.cells) {
        const auto f = detail::cell_fields(c);
        for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "," : "") << f[i];
        os << '\n';
      }
      break;
    }
    case ReportFormat::Table: {
      std::vector<std::vector<std::string>> rows;
      rows.emplace_back(kReportColumns.begin(), kReportColumns.end());
      for (const auto& c : r.cells) rows.push_back(detail::cell_fields(c));
      std::vector<std::size_t> width(kReportColumns.size(), 0);
      for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
      for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
          if (i) os << "  ";
          os << std::setw(static_cast<int>(width[i])) << (i == 0 ? std::left : std::right) << row[i];
        }
        os << '\n';
      }
      for (const auto& c : r.cells)
        if (!c.error.empty())
          os << "error: " << to_string(c.strategy) << " " << c.ranks << "x" << c.threads << ": " << c.error << '\n';
      break;
    }
  }
  return os.str();
}

} // namespace fockforge
