#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "fockforge/fock.hpp"
#include "support/oracles.hpp"
#include "support/systems.hpp"

using namespace fockforge;

namespace {

struct Fixture {
  EriEngine engine;
  SchwarzTable q;
  SymMatrix d;

  Fixture(const Molecule& mol, const BasisSpec& spec, std::uint64_t seed)
      : engine(assign_basis(mol, spec)), q(engine), d([&] {
          std::mt19937_64 rng(seed);
          return systems::random_symmetric(engine.basis().n_bf(), rng);
        }()) {}
};

double max_diff(const SymMatrix& a, const SymMatrix& b) { return (a - b).max_abs(); }

using Key = std::tuple<int, int, int, int>;

std::map<Key, int> canonical_quartets(std::size_t ns) {
  std::map<Key, int> out;
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      for (std::size_t k = 0; k <= i; ++k)
        for (std::size_t l = 0; l <= (k == i ? j : k); ++l)
          out[{static_cast<int>(i), static_cast<int>(j), static_cast<int>(k), static_cast<int>(l)}] = 0;
  return out;
}

const Strategy kParallel[] = {Strategy::Replicated, Strategy::PrivateFock, Strategy::SharedFock};

} // namespace

TEST_CASE("strategy and schedule names parse") {
  CHECK(parse_strategy("shared-fock") == Strategy::SharedFock);
  CHECK(parse_strategy("private-fock") == Strategy::PrivateFock);
  CHECK(parse_strategy("replicated") == Strategy::Replicated);
  CHECK(parse_strategy("reference") == Strategy::ReferenceSerial);
  CHECK_FALSE(parse_strategy("hybrid"));
  CHECK(parse_schedule("static") == Schedule::StaticDeterministic);
  CHECK(parse_schedule("dynamic") == Schedule::Dynamic);
  CHECK_FALSE(parse_schedule("guided"));
  for (auto s : kParallel) CHECK(parse_strategy(to_string(s)) == s);
}

TEST_CASE("pair index encoding round trips") {
  std::uint64_t ij = 0;
  for (std::size_t i = 0; i < 60; ++i)
    for (std::size_t j = 0; j <= i; ++j, ++ij) {
      CHECK(tri_encode(i, j) == ij);
      CHECK(tri_decode(ij) == std::pair{i, j});
    }
  CHECK_THROWS_AS(tri_encode(2, 3), Error);
  CHECK_THROWS_AS(tri_decode(10, 4), Error);
}

TEST_CASE("degeneracy factors") {
  CHECK(detail::degeneracy(0, 0, 0, 0) == 1);
  CHECK(detail::degeneracy(1, 0, 0, 0) == 4);
  CHECK(detail::degeneracy(1, 0, 1, 0) == 4);
  CHECK(detail::degeneracy(1, 1, 0, 0) == 2);
  CHECK(detail::degeneracy(2, 1, 1, 0) == 8);
  CHECK(detail::degeneracy(3, 2, 1, 1) == 4);
}

TEST_CASE("reference build visits each unique quartet once") {
  const Fixture fx(systems::c2h2(), systems::basis_631gd(), 1);
  FockTrace trace;
  build_fock_reference(fx.d, fx.engine, fx.q, 0.0, &trace);
  const std::uint64_t ns = fx.engine.n_shells(), pairs = ns * (ns + 1) / 2;
  CHECK(trace.visits().size() == pairs * (pairs + 1) / 2);
  auto all = canonical_quartets(ns);
  for (const auto& v : trace.visits()) ++all[{v.i, v.j, v.k, v.l}];
  CHECK(all.size() == trace.visits().size());
  CHECK(std::all_of(all.begin(), all.end(), [](const auto& e) { return e.second == 1; }));
  CHECK(trace.screened() == 0);
}

TEST_CASE("reference build matches the dense four-index contraction") {
  std::mt19937_64 rng(99);
  std::vector<Molecule> mols{systems::c2h2(), systems::ch4(), systems::hydrogen_chain(6)};
  while (mols.size() < 6) {
    auto m = systems::random_molecule(rng, 2, 5, 0.4);
    if (assign_basis(m, systems::basis_631gd()).n_bf() <= 40) mols.push_back(m);
  }
  for (std::size_t m = 0; m < mols.size(); ++m) {
    const Fixture fx(mols[m], systems::basis_631gd(), 10 + m);
    REQUIRE(fx.engine.basis().n_bf() <= 40);
    const auto ref = build_fock_reference(fx.d, fx.engine, fx.q, 0.0);
    const auto dense = oracle::dense_fock(fx.d, oracle::eri_tensor(fx.engine));
    INFO("molecule " << m << " n_bf " << fx.engine.basis().n_bf());
    CHECK((ref.matrix() - dense).max_abs() <= 1e-11);
  }
}

TEST_CASE("every strategy matches the reference") {
  std::mt19937_64 rng(5);
  for (int sys = 0; sys < 2; ++sys) {
    const auto mol = systems::random_molecule(rng, 2, 4, 0.4);
    const Fixture fx(mol, systems::basis_631gd(), 20 + sys);
    const auto ref = build_fock_reference(fx.d, fx.engine, fx.q, 0.0);
    const double tol = 1e-10 * std::max(1.0, ref.max_abs());
    for (auto strategy : kParallel)
      for (auto sched : {Schedule::Dynamic, Schedule::StaticDeterministic})
        for (int ranks : {1, 2, 4})
          for (int threads : {1, 2, 4, 8}) {
            FockOptions opt;
            opt.strategy = strategy;
            opt.schedule = sched;
            opt.threads = threads;
            opt.tau = 0.0;
            INFO(to_string(strategy) << " " << to_string(sched) << " R=" << ranks << " T=" << threads);
            CHECK(max_diff(build_fock(fx.d, fx.engine, fx.q, opt, ranks), ref) <= tol);
          }
  }
}

TEST_CASE("parallel builds compute each unscreened quartet exactly once") {
  const Fixture fx(systems::acetylene_pair(), systems::basis_sto3g(), 3);
  const double tau = 1e-10;
  for (auto strategy : kParallel)
    for (auto sched : {Schedule::Dynamic, Schedule::StaticDeterministic})
      for (auto [ranks, threads] : {std::pair{1, 1}, std::pair{2, 3}, std::pair{4, 2}, std::pair{1, 8}}) {
        INFO(to_string(strategy) << " " << to_string(sched) << " R=" << ranks << " T=" << threads);
        FockTrace trace;
        FockOptions opt;
        opt.strategy = strategy;
        opt.schedule = sched;
        opt.threads = threads;
        opt.tau = tau;
        opt.trace = &trace;
        build_fock(fx.d, fx.engine, fx.q, opt, ranks);

        auto all = canonical_quartets(fx.engine.n_shells());
        for (const auto& v : trace.visits()) ++all[{v.i, v.j, v.k, v.l}];
        int twice = 0, skipped_above = 0, visited_below = 0;
        for (const auto& [key, hits] : all) {
          const auto [i, j, k, l] = key;
          const bool below = fx.q(i, j) * fx.q(k, l) < tau;
          twice += hits > 1;
          skipped_above += hits == 0 && !below;
          visited_below += hits == 1 && below;
        }
        CHECK(all.size() == canonical_quartets(fx.engine.n_shells()).size());
        CHECK(twice == 0);
        CHECK(skipped_above == 0);
        CHECK(visited_below == 0);
      }
}

TEST_CASE("shared Fock tasks are split across threads without overlap") {
  const Fixture fx(systems::acetylene_pair(), systems::basis_sto3g(), 4);
  FockTrace trace;
  FockOptions opt;
  opt.strategy = Strategy::SharedFock;
  opt.threads = 4;
  opt.tau = 0.0;
  opt.trace = &trace;
  build_fock(fx.d, fx.engine, fx.q, opt, 2);
  // Within one (rank, task) every visit shares (i, j) and each (k, l) has one thread.
  std::map<std::pair<int, std::uint64_t>, std::pair<int, int>> task_pair;
  std::map<std::tuple<int, std::uint64_t, int, int>, int> owner;
  int bad_pair = 0, shared_kl = 0;
  std::set<int> threads_used;
  for (const auto& v : trace.visits()) {
    auto [it, fresh] = task_pair.try_emplace({v.rank, v.phase}, v.i, v.j);
    bad_pair += !fresh && it->second != std::pair{v.i, v.j};
    auto [ot, first] = owner.try_emplace({v.rank, v.phase, v.k, v.l}, v.thread);
    shared_kl += !first;
    threads_used.insert(v.thread);
  }
  CHECK(bad_pair == 0);
  CHECK(shared_kl == 0);
  CHECK(threads_used.size() > 1);
}

TEST_CASE("static schedule is bitwise reproducible") {
  std::mt19937_64 rng(8);
  const Fixture fx(systems::random_molecule(rng, 4, 6, 0.5), systems::basis_631gd(), 6);
  for (auto strategy : kParallel)
    for (auto [ranks, threads] : {std::pair{1, 4}, std::pair{2, 3}, std::pair{4, 8}}) {
      FockOptions opt;
      opt.strategy = strategy;
      opt.schedule = Schedule::StaticDeterministic;
      opt.threads = threads;
      const auto a = build_fock(fx.d, fx.engine, fx.q, opt, ranks);
      const auto b = build_fock(fx.d, fx.engine, fx.q, opt, ranks);
      INFO(to_string(strategy) << " R=" << ranks << " T=" << threads);
      CHECK(a == b);
    }
}

TEST_CASE("result does not depend on the padding quantum") {
  const Fixture fx(systems::c2h2(), systems::basis_631gd(), 7);
  FockOptions opt;
  opt.strategy = Strategy::SharedFock;
  opt.schedule = Schedule::StaticDeterministic;
  opt.threads = 3;
  opt.padding = 1;
  const auto a = build_fock(fx.d, fx.engine, fx.q, opt);
  opt.padding = 64;
  CHECK(build_fock(fx.d, fx.engine, fx.q, opt) == a);
}

TEST_CASE("builds validate their inputs") {
  const Fixture fx(systems::h2(), systems::basis_sto3g(), 1);
  FockOptions opt;
  CHECK_THROWS_AS(build_fock(SymMatrix(3), fx.engine, fx.q, opt), DimensionError);
  opt.tau = -1.0;
  CHECK_THROWS_AS(build_fock(fx.d, fx.engine, fx.q, opt), Error);
  opt.tau = 0.0;
  opt.threads = 0;
  CHECK_THROWS_AS(build_fock(fx.d, fx.engine, fx.q, opt), Error);
  opt.threads = kMaxThreads + 1;
  CHECK_THROWS_AS(build_fock(fx.d, fx.engine, fx.q, opt), Error);
  opt.threads = 1;
  opt.padding = 0;
  CHECK_THROWS_AS(build_fock(fx.d, fx.engine, fx.q, opt), Error);
  CHECK_THROWS_AS(build_fock_reference(fx.d, fx.engine, fx.q, -1.0), Error);
}

TEST_CASE("block buffer columns are padded and aligned") {
  for (std::size_t quantum : {1u, 8u, 16u}) {
    BlockBuffer buf(37, 6, 5, quantum);
    CHECK(buf.leading_dimension() % quantum == 0);
    CHECK(buf.leading_dimension() >= 37u * 6u);
    CHECK(reinterpret_cast<std::uintptr_t>(buf.column(0)) % 64 == 0);
    for (int t = 1; t < 5; ++t) CHECK(buf.column(t) - buf.column(t - 1) == static_cast<std::ptrdiff_t>(buf.leading_dimension()));
  }
  BlockBuffer padded(37, 6, 4);
  for (int t = 0; t < 4; ++t) CHECK(reinterpret_cast<std::uintptr_t>(padded.column(t)) % 64 == 0);
  CHECK_THROWS_AS(BlockBuffer(10, 1, 0), Error);
  CHECK_THROWS_AS(BlockBuffer(10, 1, 1, 0), Error);
}

TEST_CASE("flush_buffer adds the symmetrized thread sum and clears the buffer") {
  const std::size_t n = 23;
  const int width = 6;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int threads : {1, 2, 3, 8})
    for (int offset : {0, 7, 17}) {
      BlockBuffer buf(n, width, threads);
      Matrix rows(n, n);  // summed contributions to rows [offset, offset + width)
      for (int t = 0; t < threads; ++t)
        for (int mu = 0; mu < width; ++mu)
          for (std::size_t nu = 0; nu < n; ++nu) {
            const double v = u(rng);
            buf.add(t, mu, nu, v);
            rows(static_cast<std::size_t>(offset + mu), nu) += v;
          }
      Matrix f(n, n, 1.0);
      ThreadTeam team(threads);
      team.run([&](int tid) { flush_buffer(buf, f, offset, width, tid, team); });
      Matrix expect(n, n, 1.0);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) expect(r, c) += 0.5 * (rows(r, c) + rows(c, r));
      Matrix diff = f;
      diff -= expect;
      INFO("threads=" << threads << " offset=" << offset);
      CHECK(diff.max_abs() < 1e-14);
      CHECK(f == f.transpose());
      double left = 0.0;
      for (int t = 0; t < threads; ++t)
        for (std::size_t e = 0; e < buf.leading_dimension(); ++e) left = std::max(left, std::abs(buf.column(t)[e]));
      CHECK(left == 0.0);
    }
}

TEST_CASE("a failing worker does not deadlock the team") {
  ThreadTeam team(4);
  CHECK_THROWS_AS(team.run([&](int tid) {
    if (tid == 2) throw Error("worker failed");
    for (int k = 0; k < 3; ++k) team.sync();
  }),
                  Error);
}
