// fockforge: RHF Fock-build benchmark driver.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fockforge/fockforge.hpp"

namespace ff = fockforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitInternal = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<ff::Strategy> parse_strategies(const std::vector<std::string>& names) {
  std::vector<ff::Strategy> out;
  for (const auto& n : names) {
    auto s = ff::parse_strategy(n);
    if (!s) throw UsageError("unknown strategy '" + n + "' (reference, replicated, private-fock, shared-fock)");
    out.push_back(*s);
  }
  return out;
}

ff::Schedule parse_schedule_or_throw(const std::string& name) {
  auto s = ff::parse_schedule(name);
  if (!s) throw UsageError("unknown schedule '" + name + "' (dynamic, static)");
  return *s;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw ff::Error("cannot write " + path);
  f << text;
}

void check_inputs(const std::string& system, const std::string& geometry, const std::string& basis) {
  if (geometry.empty() && !ff::find_graphene_preset(system))
    throw UsageError("unknown system '" + system + "' (0.5nm, 1.0nm, 1.5nm, 2.0nm, 5.0nm, or --geometry FILE)");
  if (!ff::builtin_basis(basis) && !std::ifstream(basis))
    throw UsageError("unknown basis '" + basis + "' (6-31g(d), sto-3g, or a basis file)");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hartree-Fock Fock-matrix construction benchmark"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ff::kVersion));

  // run
  ff::BenchConfig cfg;
  std::vector<std::string> strategy_names{"shared-fock"};
  std::string schedule_name = "dynamic", format_name = "json", out_path;
  auto* run = app.add_subcommand("run", "Run an SCF sweep over strategies, ranks and threads");
  run->add_option("--system", cfg.system, "Graphene preset: 0.5nm 1.0nm 1.5nm 2.0nm 5.0nm")->capture_default_str();
  run->add_option("--geometry", cfg.geometry, "XYZ file (angstrom); overrides --system")->check(CLI::ExistingFile);
  run->add_option("--basis", cfg.basis, "Builtin basis name or basis file")->capture_default_str();
  run->add_option("--strategy", strategy_names, "reference, replicated, private-fock, shared-fock")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--ranks", cfg.ranks, "Rank counts to sweep")->delimiter(',')->capture_default_str();
  run->add_option("--threads", cfg.threads, "Thread counts to sweep")->delimiter(',')->capture_default_str();
  run->add_option("--schedule", schedule_name, "dynamic or static")->capture_default_str();
  run->add_option("--screen", cfg.tau, "Schwarz threshold; 0 disables screening")->capture_default_str();
  run->add_option("--conv", cfg.convergence, "RMS density convergence threshold")->capture_default_str();
  run->add_option("--max-iter", cfg.max_iterations, "Maximum SCF iterations")->capture_default_str();
  run->add_option("--damping", cfg.damping, "Density damping factor in [0,1)")->capture_default_str();
  run->add_option("--repetitions", cfg.repetitions, "Runs per cell; the median is reported")->capture_default_str();
  run->add_option("--format", format_name, "json, csv or table")->capture_default_str();
  run->add_option("--out", out_path, "Output file (default stdout)");
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "No progress on stderr");

  // mem
  std::string mem_strategy = "shared-fock";
  std::uint64_t mem_nbf = 0, mem_ranks = 1, mem_threads = 1;
  auto* mem = app.add_subcommand("mem", "Estimate the Fock-build memory footprint");
  mem->add_option("--strategy", mem_strategy, "replicated, private-fock or shared-fock")->capture_default_str();
  mem->add_option("--nbf", mem_nbf, "Number of basis functions")->required();
  mem->add_option("--ranks", mem_ranks, "Ranks per node")->capture_default_str();
  mem->add_option("--threads", mem_threads, "Threads per rank")->capture_default_str();

  // info
  std::string info_system = "0.5nm", info_geometry, info_basis = "6-31g(d)";
  auto* info = app.add_subcommand("info", "Print atom, shell and basis-function counts");
  info->add_option("--system", info_system, "Graphene preset")->capture_default_str();
  info->add_option("--geometry", info_geometry, "XYZ file (angstrom)")->check(CLI::ExistingFile);
  info->add_option("--basis", info_basis, "Builtin basis name or basis file")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*mem) {
      auto s = parse_strategies({mem_strategy});
      if (mem_nbf == 0 || mem_ranks == 0 || mem_threads == 0) throw UsageError("--nbf, --ranks and --threads must be positive");
      const auto bytes = ff::estimate_memory(s.front(), mem_nbf, mem_ranks, mem_threads);
      std::printf("%s N=%llu R=%llu T=%llu: %llu bytes (%.3f GB)\n", std::string(ff::to_string(s.front())).c_str(),
                  static_cast<unsigned long long>(mem_nbf), static_cast<unsigned long long>(mem_ranks),
                  static_cast<unsigned long long>(mem_threads), static_cast<unsigned long long>(bytes), bytes / 1e9);
      return kExitOk;
    }

    if (*info) {
      check_inputs(info_system, info_geometry, info_basis);
      const auto mol = ff::resolve_system(info_system, info_geometry);
      const auto basis = ff::assign_basis(mol, ff::resolve_basis(info_basis));
      const auto c = ff::count_report(basis);
      std::printf("atoms %zu\nshell_groups %zu\ninternal_shells %zu\nn_bf %zu\n", c.atoms, c.shell_groups,
                  c.internal_shells, c.n_bf);
      return kExitOk;
    }

    check_inputs(cfg.system, cfg.geometry, cfg.basis);
    cfg.strategies = parse_strategies(strategy_names);
    cfg.schedule = parse_schedule_or_throw(schedule_name);
    auto fmt = ff::parse_format(format_name);
    if (!fmt) throw UsageError("unknown format '" + format_name + "' (json, csv, table)");
    cfg.format = *fmt;
    try {
      cfg.validate();
    } catch (const ff::Error& e) {
      throw UsageError(e.what());
    }

    auto progress = [&](const ff::BenchCell& c) {
      if (quiet) return;
      if (!c.error.empty())
        std::fprintf(stderr, "%s %dx%d: error: %s\n", std::string(ff::to_string(c.strategy)).c_str(), c.ranks,
                     c.threads, c.error.c_str());
      else
        std::fprintf(stderr, "%s %dx%d: E=%.10f iter=%d total=%.3fs fock=%.3fs%s\n",
                     std::string(ff::to_string(c.strategy)).c_str(), c.ranks, c.threads, c.energy_hartree, c.iterations,
                     c.wall_total_s, c.wall_fock_s, c.converged ? "" : " (not converged)");
    };
    const auto report = ff::run_benchmark(cfg, progress);
    write_output(ff::emit_report(report, cfg.format), out_path);
    if (report.energy_spread() > 1e-9)
      std::fprintf(stderr, "warning: energies differ across cells by %.3e hartree\n", report.energy_spread());
    if (report.any_failed()) return kExitInternal;
    if (!report.all_converged()) return kExitNotConverged;
    return kExitOk;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "fockforge: %s\n", e.what());
    return kExitUsage;
  } catch (const ff::ParseError& e) {
    std::fprintf(stderr, "fockforge: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fockforge: %s\n", e.what());
    return kExitInternal;
  }
}
