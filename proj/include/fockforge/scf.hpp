#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fockforge/basis.hpp"
#include "fockforge/dist.hpp"
#include "fockforge/error.hpp"
#include "fockforge/fock.hpp"
#include "fockforge/integrals.hpp"
#include "fockforge/jacobi.hpp"
#include "fockforge/matrix.hpp"
#include "fockforge/molecule.hpp"

namespace fockforge {

struct SCFConfig {
  double convergence = 1e-8;  // RMS of the density change
  int max_iterations = 100;
  double tau = kDefaultScreenThreshold;
  Strategy strategy = Strategy::SharedFock;
  Schedule schedule = Schedule::Dynamic;
  int ranks = 1;
  int threads = 1;
  double damping = 0.0;  // D <- (1-a) D_new + a D_old
  double eigen_floor = kDefaultEigenFloor;

  void validate() const {
    if (!(convergence > 0.0)) throw Error("SCF: convergence threshold must be positive");
    if (max_iterations < 1) throw Error("SCF: max iterations must be at least 1");
    if (!(tau >= 0.0)) throw Error("SCF: screening threshold must be >= 0");
    if (ranks < 1) throw Error("SCF: rank count must be at least 1");
    if (threads < 1 || threads > kMaxThreads) throw Error("SCF: thread count out of range");
    if (!(damping >= 0.0 && damping < 1.0)) throw Error("SCF: damping must lie in [0, 1)");
    if (!(eigen_floor > 0.0)) throw Error("SCF: eigenvalue floor must be positive");
  }
};

struct SCFIteration {
  double energy = 0.0;  // total energy of the density entering the iteration
  double rms = 0.0;
  double trace_ds = 0.0;  // of the density leaving the iteration
  double fock_2e_s = 0.0;
  double diag_s = 0.0;
  double other_s = 0.0;
};

struct SCFResult {
  bool converged = false;
  int iterations = 0;
  double total_energy = 0.0;
  double electronic_energy = 0.0;
  double nuclear_repulsion = 0.0;
  double rms_final = 0.0;
  std::vector<double> orbital_energies;
  std::vector<SCFIteration> history;
  SymMatrix density;
  double wall_total_s = 0.0;
  double wall_fock_s = 0.0;
  double wall_diag_s = 0.0;
  double wall_other_s = 0.0;
};

inline SymMatrix core_hamiltonian(const BasisSet& basis, const Molecule& mol) {
  return kinetic_matrix(basis) + nuclear_matrix(basis, mol);
}

/// X for the SCF: the symmetric S^{-1/2} when nothing was floored,
/// otherwise its restriction to the retained subspace.
inline Matrix orthogonalization_matrix(const Orthogonalizer& o) { return o.dropped == 0 ? o.x.matrix() : o.retained; }

struct Orbitals {
  std::vector<double> energies;
  Matrix coefficients;  // n_bf x n_mo
};

/// Solves FC = SCe through F' = X^T F X.
inline Orbitals solve_roothaan(const SymMatrix& f, const Matrix& x) {
  const auto eig = jacobi_eigh(transform(x, f));
  return {eig.values, gemm(x, eig.vectors)};
}

/// D = 2 C_occ C_occ^T.
inline SymMatrix density_from_orbitals(const Matrix& c, std::size_t n_occ) {
  if (n_occ > c.cols())
    throw Error("density: " + std::to_string(n_occ) + " occupied orbitals but only " + std::to_string(c.cols()) +
                " orbitals available");
  const std::size_t n = c.rows();
  Matrix d(n, n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q <= p; ++q) {
      double s = 0.0;
      for (std::size_t k = 0; k < n_occ; ++k) s += c(p, k) * c(q, k);
      d(p, q) = 2.0 * s;
      d(q, p) = 2.0 * s;
    }
  return SymMatrix::from_symmetric(std::move(d));
}

/// Core-Hamiltonian guess.
inline SymMatrix guess_density(const SymMatrix& h, const Matrix& x, std::size_t n_occ) {
  if (h.size() != x.rows()) throw DimensionError("guess_density: H and X dimensions differ");
  if (n_occ > x.cols())
    throw Error("guess_density: " + std::to_string(n_occ) + " occupied orbitals exceed " + std::to_string(x.cols()) +
                " basis functions");
  return density_from_orbitals(solve_roothaan(h, x).coefficients, n_occ);
}

/// E = 1/2 sum D (H + F).
inline double electronic_energy(const SymMatrix& d, const SymMatrix& h, const SymMatrix& f) {
  if (d.size() != h.size() || d.size() != f.size()) throw DimensionError("electronic_energy: dimension mismatch");
  return 0.5 * (trace_product(d, h) + trace_product(d, f));
}

inline double rms_difference(const SymMatrix& a, const SymMatrix& b) {
  if (a.size() != b.size()) throw DimensionError("rms_difference: dimension mismatch");
  double s = 0.0;
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) s += (da[i] - db[i]) * (da[i] - db[i]);
  return std::sqrt(s / static_cast<double>(da.size()));
}

/// Everything the iteration needs that does not depend on the density.
struct SCFSetup {
  const Molecule* mol;
  EriEngine engine;
  SchwarzTable schwarz;
  SymMatrix s, h;
  Matrix x;
  double e_nuc;

  SCFSetup(const Molecule& m, const BasisSet& basis, double eigen_floor = kDefaultEigenFloor)
      : mol(&m), engine(basis), schwarz(engine), s(overlap_matrix(basis)), h(core_hamiltonian(basis, m)),
        x(orthogonalization_matrix(orthogonalizer(s, eigen_floor))), e_nuc(nuclear_repulsion(m)) {}
};

/// Runs the iteration on one rank. Every rank of the group calls this with
/// the same arguments and executes the same control flow; only the Fock
/// build is distributed.
inline SCFResult scf_iterate(const SCFSetup& setup, const SCFConfig& cfg, const Rank& rank) {
  using clock = std::chrono::steady_clock;
  auto secs = [](clock::duration d) { return std::chrono::duration<double>(d).count(); };
  cfg.validate();
  const auto t_start = clock::now();
  const auto n_occ = static_cast<std::size_t>(setup.mol->occupied_orbitals());

  FockOptions fopt;
  fopt.strategy = cfg.strategy;
  fopt.schedule = cfg.schedule;
  fopt.threads = cfg.threads;
  fopt.tau = cfg.tau;

  SCFResult r;
  r.nuclear_repulsion = setup.e_nuc;
  SymMatrix d = guess_density(setup.h, setup.x, n_occ);
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    SCFIteration rec;
    const auto t0 = clock::now();
    const SymMatrix f2e = build_fock(d, setup.engine, setup.schwarz, fopt, rank);
    const auto t1 = clock::now();
    const SymMatrix f = setup.h + f2e;
    r.electronic_energy = electronic_energy(d, setup.h, f);
    rec.energy = r.electronic_energy + setup.e_nuc;

    const auto t2 = clock::now();
    Orbitals orb = solve_roothaan(f, setup.x);
    const auto t3 = clock::now();
    SymMatrix d_new = density_from_orbitals(orb.coefficients, n_occ);
    rec.rms = rms_difference(d_new, d);
    if (cfg.damping > 0.0) d_new = d_new * (1.0 - cfg.damping) + d * cfg.damping;
    d = std::move(d_new);
    rec.trace_ds = trace_product(d, setup.s);
    r.orbital_energies = std::move(orb.energies);
    const auto t4 = clock::now();

    rec.fock_2e_s = secs(t1 - t0);
    rec.diag_s = secs(t3 - t2);
    rec.other_s = secs(t4 - t0) - rec.fock_2e_s - rec.diag_s;
    r.history.push_back(rec);
    r.iterations = it;
    r.rms_final = rec.rms;
    if (rec.rms < cfg.convergence) {
      r.converged = true;
      break;
    }
  }
  r.total_energy = r.electronic_energy + setup.e_nuc;
  r.density = std::move(d);
  for (const auto& h : r.history) {
    r.wall_fock_s += h.fock_2e_s;
    r.wall_diag_s += h.diag_s;
  }
  r.wall_total_s = secs(clock::now() - t_start);
  r.wall_other_s = r.wall_total_s - r.wall_fock_s - r.wall_diag_s;
  return r;
}

/// Full calculation on cfg.ranks in-process ranks; returns rank 0's result.
inline SCFResult run_scf(const Molecule& mol, const BasisSet& basis, const SCFConfig& cfg) {
  cfg.validate();
  const SCFSetup setup(mol, basis, cfg.eigen_floor);
  auto results = spawn(cfg.ranks, [&](Rank r) { return scf_iterate(setup, cfg, r); });
  return std::move(results.front());
}

} // namespace fockforge
