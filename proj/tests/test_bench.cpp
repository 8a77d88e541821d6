#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fockforge/bench.hpp"

using namespace fockforge;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / ("fockforge_test_bench_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

fs::path write_h2_xyz() {
  const auto path = scratch_dir() / "h2.xyz";
  std::ofstream(path) << "2\nhydrogen\nH 0 0 0\nH 0 0 0.7408481\n";
  return path;
}

fs::path write_c2h2_xyz() {
  const auto path = scratch_dir() / "c2h2.xyz";
  std::ofstream(path) << "4\nacetylene\nC 0 0 -0.6019\nC 0 0 0.6019\nH 0 0 -1.6620\nH 0 0 1.6620\n";
  return path;
}

struct CliResult {
  int code;
  std::string out;
};

CliResult cli(const std::string& args) {
  const auto out = scratch_dir() / "cli_out.txt";
  const std::string cmd = std::string(FOCKFORGE_CLI) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream f(out);
  std::stringstream ss;
  ss << f.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  return out;
}

} // namespace

TEST_CASE("memory model fixtures") {
  CHECK(estimate_memory(Strategy::SharedFock, 660, 4, 1) == 48'787'200ull);
  CHECK(estimate_memory(Strategy::PrivateFock, 660, 4, 64) == 919'987'200ull);
  CHECK(estimate_memory(Strategy::Replicated, 660, 4, 64) == 5ull * 660 * 660 * 4 * 8 / 2);
  CHECK(estimate_memory(Strategy::ReferenceSerial, 660, 4, 64) == 5ull * 660 * 660 * 8 / 2);
}

TEST_CASE("memory model structure") {
  for (std::uint64_t n : {1ull, 34ull, 660ull, 30240ull})
    for (std::uint64_t r : {1ull, 2ull, 4ull, 256ull}) {
      INFO("N=" << n << " R=" << r);
      const auto shf = estimate_memory(Strategy::SharedFock, n, r, 1);
      const auto rep = estimate_memory(Strategy::Replicated, n, r, 1);
      for (std::uint64_t t = 1; t <= 256; t *= 2) {
        CHECK(estimate_memory(Strategy::SharedFock, n, r, t) == shf);
        CHECK(estimate_memory(Strategy::Replicated, n, r, t) == rep);
        const auto prf = estimate_memory(Strategy::PrivateFock, n, r, t);
        CHECK(estimate_memory(Strategy::PrivateFock, n, r, t + 1) - prf == n * n * r * 8);
        CHECK(prf == estimate_memory(Strategy::PrivateFock, n, r, 1) + (t - 1) * n * n * r * 8);
      }
      CHECK(estimate_memory(Strategy::SharedFock, n, 2 * r, 1) == 2 * shf);
    }
  CHECK_THROWS_AS(estimate_memory(Strategy::SharedFock, 0, 1, 1), Error);
  CHECK_THROWS_AS(estimate_memory(Strategy::SharedFock, 1, 0, 1), Error);
  CHECK_THROWS_AS(estimate_memory(Strategy::PrivateFock, 1, 1, 0), Error);
}

TEST_CASE("scaling is relative to the fewest-worker cell of each strategy") {
  auto cell = [](Strategy s, int r, int t, double wall) {
    BenchCell c;
    c.strategy = s;
    c.ranks = r;
    c.threads = t;
    c.wall_total_s = wall;
    return c;
  };
  std::vector<BenchCell> cells = {cell(Strategy::SharedFock, 2, 2, 4.0), cell(Strategy::SharedFock, 1, 1, 10.0),
                                  cell(Strategy::PrivateFock, 1, 2, 6.0), cell(Strategy::PrivateFock, 1, 4, 4.0),
                                  cell(Strategy::SharedFock, 1, 8, 1.0)};
  cells.back().error = "failed";
  compute_scaling(cells);
  CHECK(cells[1].speedup == 1.0);
  CHECK(cells[1].efficiency_pct == 100.0);
  CHECK(cells[0].speedup == Catch::Approx(2.5));
  CHECK(cells[0].efficiency_pct == Catch::Approx(62.5));
  CHECK(cells[2].speedup == 1.0);
  CHECK(cells[3].speedup == Catch::Approx(1.5));
  CHECK(cells[3].efficiency_pct == Catch::Approx(75.0));
  CHECK(cells[4].speedup == 0.0);
  CHECK(cells[4].efficiency_pct == 0.0);
}

TEST_CASE("report formats") {
  BenchReport r;
  r.meta.timestamp = "2024-01-01T00:00:00Z";
  r.meta.host = "node";
  BenchCell a;
  a.strategy = Strategy::PrivateFock;
  a.ranks = 2;
  a.threads = 4;
  a.wall_total_s = 1.5;
  a.iterations = 12;
  a.converged = true;
  a.energy_hartree = -76.817039286937;
  a.est_bytes = 123456789;
  a.speedup = 1.0;
  a.efficiency_pct = 100.0;
  BenchCell b = a;
  b.schedule = Schedule::StaticDeterministic;
  b.error = "rank 1 failed";
  r.cells = {a, b};

  const auto j = nlohmann::json::parse(emit_report(r, ReportFormat::Json));
  CHECK(j.at("meta").at("version") == std::string(kVersion));
  CHECK(j.at("meta").at("host") == "node");
  REQUIRE(j.at("cells").size() == 2);
  const auto& c0 = j.at("cells").at(0);
  for (auto col : kReportColumns) CHECK(c0.contains(std::string(col)));
  CHECK_FALSE(c0.contains("error"));
  CHECK(c0.at("strategy") == "private-fock");
  CHECK(c0.at("energy_hartree").get<double>() == a.energy_hartree);
  CHECK(c0.at("est_bytes").get<std::uint64_t>() == 123456789u);
  CHECK(j.at("cells").at(1).at("error") == "rank 1 failed");
  CHECK(j.at("cells").at(1).at("schedule") == "static");

  const auto lines = split(emit_report(r, ReportFormat::Csv), '\n');
  REQUIRE(lines.size() == 3);
  CHECK(split(lines[0], ',').size() == kReportColumns.size());
  CHECK(split(lines[0], ',')[0] == "strategy");
  for (std::size_t i = 1; i < lines.size(); ++i) CHECK(split(lines[i], ',').size() == kReportColumns.size());
  CHECK(lines[1].find("-76.8170392869") != std::string::npos);

  const auto table = split(emit_report(r, ReportFormat::Table), '\n');
  REQUIRE(table.size() >= 3);
  CHECK(table[0].find("efficiency_pct") != std::string::npos);
  CHECK(table[1].find("private-fock") != std::string::npos);

  CHECK(parse_format("json") == ReportFormat::Json);
  CHECK(parse_format("csv") == ReportFormat::Csv);
  CHECK(parse_format("table") == ReportFormat::Table);
  CHECK_FALSE(parse_format("xml"));
}

TEST_CASE("report summaries") {
  BenchReport r;
  BenchCell a;
  a.converged = true;
  a.energy_hartree = -1.0;
  BenchCell b = a;
  b.energy_hartree = -1.0 + 1e-10;
  r.cells = {a, b};
  CHECK(r.all_converged());
  CHECK_FALSE(r.any_failed());
  CHECK(r.energy_spread() == Catch::Approx(1e-10).margin(1e-16));
  r.cells[1].error = "x";
  CHECK(r.any_failed());
}

TEST_CASE("bench configuration is validated") {
  auto bad = [](auto edit) {
    BenchConfig cfg;
    edit(cfg);
    CHECK_THROWS_AS(cfg.validate(), Error);
  };
  bad([](BenchConfig& c) { c.strategies.clear(); });
  bad([](BenchConfig& c) { c.ranks = {1, 0}; });
  bad([](BenchConfig& c) { c.threads = {0}; });
  bad([](BenchConfig& c) { c.threads = {kMaxThreads + 1}; });
  bad([](BenchConfig& c) { c.repetitions = 0; });
  CHECK_NOTHROW(BenchConfig{}.validate());
}

TEST_CASE("a small sweep runs every cell") {
  BenchConfig cfg;
  cfg.geometry = write_h2_xyz().string();
  cfg.basis = "sto-3g";
  cfg.strategies = {Strategy::Replicated, Strategy::SharedFock};
  cfg.ranks = {1, 2};
  cfg.threads = {1, 2};
  cfg.repetitions = 1;
  int seen = 0;
  const auto report = run_benchmark(cfg, [&](const BenchCell&) { ++seen; });
  CHECK(seen == 8);
  REQUIRE(report.cells.size() == 8);
  CHECK(report.all_converged());
  CHECK_FALSE(report.any_failed());
  CHECK(report.energy_spread() < 1e-10);
  CHECK(report.cells.front().energy_hartree == Catch::Approx(-1.1167).margin(1e-3));
  for (const auto& c : report.cells) {
    CHECK(c.est_bytes == estimate_memory(c.strategy, 2, c.ranks, c.threads));
    CHECK(c.speedup > 0.0);
  }
}

TEST_CASE("command-line exit codes and output") {
  const auto mem = cli("mem --strategy shared-fock --nbf 660 --ranks 4");
  CHECK(mem.code == 0);
  CHECK(mem.out.find("48787200 bytes") != std::string::npos);
  CHECK(cli("mem --strategy bogus --nbf 10").code == 1);
  CHECK(cli("mem --nbf 0").code == 1);
  CHECK(cli("frobnicate").code == 1);

  const auto info = cli("info --system 0.5nm");
  CHECK(info.code == 0);
  CHECK(info.out.find("atoms 44\n") != std::string::npos);
  CHECK(info.out.find("n_bf 660\n") != std::string::npos);

  const auto xyz = write_h2_xyz().string();
  const auto run = cli("run -q --geometry " + xyz + " --basis sto-3g --repetitions 1 --format csv");
  CHECK(run.code == 0);
  CHECK(run.out.rfind("strategy,", 0) == 0);
  CHECK(cli("run -q --geometry " + write_c2h2_xyz().string() + " --basis sto-3g --repetitions 1 --max-iter 2").code == 2);
  CHECK(cli("run -q --geometry " + xyz + " --basis sto-3g --format xml").code == 1);
  CHECK(cli("run -q --geometry " + xyz + " --basis nonexistent.basis").code == 1);
}
