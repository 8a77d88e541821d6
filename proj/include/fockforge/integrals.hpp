#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "fockforge/basis.hpp"
#include "fockforge/boys.hpp"
#include "fockforge/error.hpp"
#include "fockforge/matrix.hpp"
#include "fockforge/molecule.hpp"

namespace fockforge {

// McMurchie-Davidson integrals over contracted Cartesian shells with l <= 2.

namespace detail {

inline constexpr int kMaxPairL = 2 * kMaxAngularMomentum;
inline constexpr int kMaxQuartetL = 4 * kMaxAngularMomentum;

constexpr int hermite_count(int l) { return (l + 1) * (l + 2) * (l + 3) / 6; }

inline constexpr int kMaxHermite = hermite_count(kMaxQuartetL);
inline constexpr int kMaxPairHermite = hermite_count(kMaxPairL);
inline constexpr int kMaxShellWidth = shell_width(kMaxAngularMomentum);

// Compact (t,u,v) ordering by total degree, so the first hermite_count(L)
// entries are exactly those with t+u+v <= L.
struct HermiteIndex {
  std::array<int, kMaxHermite> t{}, u{}, v{};
  int index[kMaxQuartetL + 1][kMaxQuartetL + 1][kMaxQuartetL + 1]{};
  // index of (t1+t2, u1+u2, v1+v2) for bra/ket entries of pair tables
  int sum[kMaxPairHermite][kMaxPairHermite]{};
  std::array<double, kMaxPairHermite> sign{};
};

inline const HermiteIndex& hermite_index() {
  static const HermiteIndex h = [] {
    HermiteIndex x;
    int k = 0;
    for (int n = 0; n <= kMaxQuartetL; ++n)
      for (int t = n; t >= 0; --t)
        for (int u = n - t; u >= 0; --u) {
          const int v = n - t - u;
          x.t[k] = t;
          x.u[k] = u;
          x.v[k] = v;
          x.index[t][u][v] = k;
          ++k;
        }
    for (int a = 0; a < kMaxPairHermite; ++a) {
      x.sign[a] = ((x.t[a] + x.u[a] + x.v[a]) % 2) ? -1.0 : 1.0;
      for (int b = 0; b < kMaxPairHermite; ++b) x.sum[a][b] = x.index[x.t[a] + x.t[b]][x.u[a] + x.u[b]][x.v[a] + x.v[b]];
    }
    return x;
  }();
  return h;
}

// One-dimensional Hermite expansion coefficients E^{ij}_t of a Gaussian
// product; i, j up to 4 so kinetic integrals can raise l by two.
struct Hermite1D {
  static constexpr int kN = kMaxAngularMomentum + 3;
  double e[kN][kN][2 * kN]{};
};

inline void hermite_1d(int imax, int jmax, double p, double xpa, double xpb, Hermite1D& h) {
  const double inv2p = 0.5 / p;
  for (int i = 0; i <= imax; ++i)
    for (int j = 0; j <= jmax; ++j)
      for (int t = 0; t <= i + j + 1; ++t) h.e[i][j][t] = 0.0;
  h.e[0][0][0] = 1.0;
  for (int i = 0; i < imax; ++i)
    for (int t = 0; t <= i + 1; ++t)
      h.e[i + 1][0][t] = (t > 0 ? inv2p * h.e[i][0][t - 1] : 0.0) + xpa * h.e[i][0][t] + (t + 1) * h.e[i][0][t + 1];
  for (int i = 0; i <= imax; ++i)
    for (int j = 0; j < jmax; ++j)
      for (int t = 0; t <= i + j + 1; ++t)
        h.e[i][j + 1][t] = (t > 0 ? inv2p * h.e[i][j][t - 1] : 0.0) + xpb * h.e[i][j][t] + (t + 1) * h.e[i][j][t + 1];
}

/// Hermite Coulomb integrals R^0_{tuv} for t+u+v <= l, written to r0 in
/// compact order. `boys` holds F_0..F_l at alpha*|r|^2.
inline void hermite_coulomb(int l, double alpha, const Vec3& r, const double* boys, double* r0) {
  const auto& hi = hermite_index();
  double rn[kMaxQuartetL + 1][kMaxHermite];
  double f = 1.0;
  for (int n = 0; n <= l; ++n) {
    rn[n][0] = f * boys[n];
    f *= -2.0 * alpha;
  }
  for (int deg = 1; deg <= l; ++deg) {
    const int first = hermite_count(deg - 1), last = hermite_count(deg);
    for (int n = 0; n + deg <= l; ++n) {
      const double* up = rn[n + 1];
      for (int k = first; k < last; ++k) {
        const int t = hi.t[k], u = hi.u[k], v = hi.v[k];
        double val;
        if (t > 0) {
          val = r[0] * up[hi.index[t - 1][u][v]];
          if (t > 1) val += (t - 1) * up[hi.index[t - 2][u][v]];
        } else if (u > 0) {
          val = r[1] * up[hi.index[t][u - 1][v]];
          if (u > 1) val += (u - 1) * up[hi.index[t][u - 2][v]];
        } else {
          val = r[2] * up[hi.index[t][u][v - 1]];
          if (v > 1) val += (v - 1) * up[hi.index[t][u][v - 2]];
        }
        rn[n][k] = val;
      }
    }
  }
  std::copy(rn[0], rn[0] + hermite_count(l), r0);
}

} // namespace detail

/// Precomputed Gaussian-product data of a shell pair. For each surviving
/// primitive pair, `e` holds the Hermite expansion of every Cartesian
/// function pair with contraction coefficients, component scales and the
/// exp(-mu R_AB^2) prefactor folded in. Only structurally nonzero Hermite
/// terms are stored: function pair ab owns entries nz_start[ab] up to
/// nz_start[ab+1], with Hermite indices nz_h.
struct ShellPair {
  struct Prim {
    double p = 0.0;
    Vec3 center{};
  };

  int i = 0, j = 0;
  int la = 0, lb = 0;
  int nab = 0;
  int nherm = 0;
  int nnz = 0;
  std::vector<int> nz_start;
  std::vector<int> nz_h;
  std::vector<Prim> prims;
  std::vector<double> e;         // [prim][nnz]
  std::vector<double> e_signed;  // e times (-1)^{t+u+v}, used on the ket side

  int l() const noexcept { return la + lb; }
};

inline constexpr double kPrimitivePairCutoff = 1e-16;

inline ShellPair make_shell_pair(const BasisSet& basis, int i, int j) {
  const Shell& a = basis[static_cast<std::size_t>(i)];
  const Shell& b = basis[static_cast<std::size_t>(j)];
  const auto& hi = detail::hermite_index();
  ShellPair sp;
  sp.i = i;
  sp.j = j;
  sp.la = a.l;
  sp.lb = b.l;
  sp.nab = a.width() * b.width();
  sp.nherm = detail::hermite_count(a.l + b.l);
  const auto ca = cartesian_components(a.l), cb = cartesian_components(b.l);
  const double ab2 = std::pow(a.center[0] - b.center[0], 2) + std::pow(a.center[1] - b.center[1], 2) +
                     std::pow(a.center[2] - b.center[2], 2);
  sp.nz_start.push_back(0);
  for (int fa = 0; fa < a.width(); ++fa)
    for (int fb = 0; fb < b.width(); ++fb) {
      for (int h = 0; h < sp.nherm; ++h)
        if (hi.t[h] <= ca[fa].x + cb[fb].x && hi.u[h] <= ca[fa].y + cb[fb].y && hi.v[h] <= ca[fa].z + cb[fb].z)
          sp.nz_h.push_back(h);
      sp.nz_start.push_back(static_cast<int>(sp.nz_h.size()));
    }
  sp.nnz = static_cast<int>(sp.nz_h.size());

  detail::Hermite1D hx, hy, hz;
  for (std::size_t pa = 0; pa < a.nprim(); ++pa) {
    for (std::size_t pb = 0; pb < b.nprim(); ++pb) {
      const double alpha = a.exponents[pa], beta = b.exponents[pb];
      const double p = alpha + beta;
      const double k = a.coefficients[pa] * b.coefficients[pb] * std::exp(-alpha * beta / p * ab2);
      if (std::abs(k) < kPrimitivePairCutoff) continue;
      Vec3 pc;
      for (int d = 0; d < 3; ++d) pc[d] = (alpha * a.center[d] + beta * b.center[d]) / p;
      detail::hermite_1d(a.l, b.l, p, pc[0] - a.center[0], pc[0] - b.center[0], hx);
      detail::hermite_1d(a.l, b.l, p, pc[1] - a.center[1], pc[1] - b.center[1], hy);
      detail::hermite_1d(a.l, b.l, p, pc[2] - a.center[2], pc[2] - b.center[2], hz);
      sp.prims.push_back({p, pc});
      for (int fa = 0; fa < a.width(); ++fa) {
        for (int fb = 0; fb < b.width(); ++fb) {
          const auto& pa3 = ca[fa];
          const auto& pb3 = cb[fb];
          const int ab = fa * b.width() + fb;
          const double scale = k * a.component_scale[fa] * b.component_scale[fb];
          for (int m = sp.nz_start[ab]; m < sp.nz_start[ab + 1]; ++m) {
            const int h = sp.nz_h[m];
            const double v = scale * hx.e[pa3.x][pb3.x][hi.t[h]] * hy.e[pa3.y][pb3.y][hi.u[h]] * hz.e[pa3.z][pb3.z][hi.v[h]];
            sp.e.push_back(v);
            sp.e_signed.push_back(hi.sign[h] * v);
          }
        }
      }
    }
  }
  return sp;
}

/// Scratch space for one quartet evaluation; one per thread.
struct EriScratch {
  std::array<double, detail::kMaxHermite> r0{};
  std::array<double, detail::kMaxPairHermite * detail::kMaxShellWidth * detail::kMaxShellWidth> x{};
  std::array<double, detail::kMaxPairHermite> rrow{};
  std::array<double, detail::kMaxQuartetL + 1> boys{};
};

namespace detail {
inline double dist2(const Vec3& a, const Vec3& b) {
  return (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]);
}
} // namespace detail

/// (ab|cd) for all functions of the bra and ket pairs, written to out in
/// [a][b][c][d] order.
inline void compute_eri(const ShellPair& bra, const ShellPair& ket, double* out, EriScratch& s) {
  const auto& hi = detail::hermite_index();
  const int nab = bra.nab, ncd = ket.nab;
  const int nh1 = bra.nherm, nh2 = ket.nherm;
  const int l = bra.l() + ket.l();
  std::fill(out, out + nab * ncd, 0.0);
  constexpr double two_pi_52 = 34.98683665524972;  // 2 pi^{5/2}

  for (std::size_t pb = 0; pb < bra.prims.size(); ++pb) {
    const auto& bp = bra.prims[pb];
    const double* eb = &bra.e[pb * static_cast<std::size_t>(bra.nnz)];
    if (l == 0) {
      double acc = 0.0;
      for (std::size_t pk = 0; pk < ket.prims.size(); ++pk) {
        const auto& kp = ket.prims[pk];
        const double p = bp.p, q = kp.p;
        const double r2 = detail::dist2(bp.center, kp.center);
        boys_array(0, p * q / (p + q) * r2, s.boys.data());
        acc += s.boys[0] * ket.e_signed[pk] / (p * q * std::sqrt(p + q));
      }
      out[0] += two_pi_52 * eb[0] * acc;
      continue;
    }

    // x[h1][cd] = sum over ket primitives of pref * sum_h2 R[h1+h2] * ek[cd][h2]
    std::fill(s.x.begin(), s.x.begin() + nh1 * ncd, 0.0);
    for (std::size_t pk = 0; pk < ket.prims.size(); ++pk) {
      const auto& kp = ket.prims[pk];
      const double p = bp.p, q = kp.p;
      const double alpha = p * q / (p + q);
      const Vec3 pq{bp.center[0] - kp.center[0], bp.center[1] - kp.center[1], bp.center[2] - kp.center[2]};
      const double r2 = pq[0] * pq[0] + pq[1] * pq[1] + pq[2] * pq[2];
      const double pref = two_pi_52 / (p * q * std::sqrt(p + q));
      const double* ek = &ket.e_signed[pk * static_cast<std::size_t>(ket.nnz)];
      boys_array(l, alpha * r2, s.boys.data());
      detail::hermite_coulomb(l, alpha, pq, s.boys.data(), s.r0.data());
      for (int h1 = 0; h1 < nh1; ++h1) {
        for (int h2 = 0; h2 < nh2; ++h2) s.rrow[h2] = pref * s.r0[hi.sum[h1][h2]];
        double* xr = &s.x[static_cast<std::size_t>(h1 * ncd)];
        for (int cd = 0; cd < ncd; ++cd) {
          double acc = 0.0;
          for (int m = ket.nz_start[cd]; m < ket.nz_start[cd + 1]; ++m) acc += s.rrow[ket.nz_h[m]] * ek[m];
          xr[cd] += acc;
        }
      }
    }
    for (int ab = 0; ab < nab; ++ab) {
      double* o = out + ab * ncd;
      for (int m = bra.nz_start[ab]; m < bra.nz_start[ab + 1]; ++m) {
        const double e = eb[m];
        const double* xr = &s.x[static_cast<std::size_t>(bra.nz_h[m] * ncd)];
        for (int cd = 0; cd < ncd; ++cd) o[cd] += e * xr[cd];
      }
    }
  }
}

/// ERI values of one shell quartet, [a][b][c][d] row-major.
struct QuartetBlock {
  int i = 0, j = 0, k = 0, l = 0;
  std::array<int, 4> dims{};
  std::vector<double> values;

  double operator()(int a, int b, int c, int d) const {
    return values[static_cast<std::size_t>(((a * dims[1] + b) * dims[2] + c) * dims[3] + d)];
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

inline std::size_t tri_index(std::size_t i, std::size_t j) {  // i >= j
  return i * (i + 1) / 2 + j;
}

/// Owns the shell-pair table of a basis; immutable and shareable between
/// threads once built.
class EriEngine {
 public:
  explicit EriEngine(BasisSet basis) : basis_(std::move(basis)) {
    const int n = static_cast<int>(basis_.size());
    pairs_.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) pairs_.push_back(make_shell_pair(basis_, i, j));
  }

  const BasisSet& basis() const noexcept { return basis_; }
  std::size_t n_shells() const noexcept { return basis_.size(); }

  /// Pair (i, j) with i >= j.
  const ShellPair& pair(std::size_t i, std::size_t j) const { return pairs_[tri_index(i, j)]; }

  /// Canonical-order fast path: i >= j, k >= l. out holds
  /// width_i*width_j*width_k*width_l values.
  void compute(std::size_t i, std::size_t j, std::size_t k, std::size_t l, double* out, EriScratch& s) const {
    compute_eri(pair(i, j), pair(k, l), out, s);
  }

  /// Any index order.
  QuartetBlock quartet(int i, int j, int k, int l) const {
    const int n = static_cast<int>(n_shells());
    for (int x : {i, j, k, l})
      if (x < 0 || x >= n) throw Error("eri_quartet: shell index out of range");
    QuartetBlock q;
    q.i = i;
    q.j = j;
    q.k = k;
    q.l = l;
    q.dims = {basis_[i].width(), basis_[j].width(), basis_[k].width(), basis_[l].width()};
    const bool swap_bra = i < j, swap_ket = k < l;
    const int bi = std::max(i, j), bj = std::min(i, j), kk = std::max(k, l), kl = std::min(k, l);
    std::vector<double> raw(static_cast<std::size_t>(q.dims[0] * q.dims[1] * q.dims[2] * q.dims[3]));
    EriScratch s;
    compute(bi, bj, kk, kl, raw.data(), s);
    const int w1 = basis_[bj].width(), w3 = basis_[kl].width(), w2 = basis_[kk].width();
    q.values.resize(raw.size());
    for (int a = 0; a < q.dims[0]; ++a)
      for (int b = 0; b < q.dims[1]; ++b)
        for (int c = 0; c < q.dims[2]; ++c)
          for (int d = 0; d < q.dims[3]; ++d) {
            const int ra = swap_bra ? b : a, rb = swap_bra ? a : b;
            const int rc = swap_ket ? d : c, rd = swap_ket ? c : d;
            q.values[static_cast<std::size_t>(((a * q.dims[1] + b) * q.dims[2] + c) * q.dims[3] + d)] =
                raw[static_cast<std::size_t>(((ra * w1 + rb) * w2 + rc) * w3 + rd)];
          }
    return q;
  }

 private:
  BasisSet basis_;
  std::vector<ShellPair> pairs_;
};

inline QuartetBlock eri_quartet(const EriEngine& engine, int i, int j, int k, int l) { return engine.quartet(i, j, k, l); }

// ---------------------------------------------------------------------------
// One-electron integrals

struct PointCharge {
  double charge = 0.0;
  Vec3 position{};
};

inline std::vector<PointCharge> nuclear_charges(const Molecule& mol) {
  std::vector<PointCharge> out;
  for (const auto& a : mol.atoms()) out.push_back({static_cast<double>(a.element), a.position});
  return out;
}

namespace detail {

enum class OneElectron { Overlap, Kinetic, Nuclear };

inline Matrix one_electron_block(const Shell& a, const Shell& b, OneElectron kind, std::span<const PointCharge> charges) {
  const auto ca = cartesian_components(a.l), cb = cartesian_components(b.l);
  Matrix out(static_cast<std::size_t>(a.width()), static_cast<std::size_t>(b.width()));
  const double ab2 = std::pow(a.center[0] - b.center[0], 2) + std::pow(a.center[1] - b.center[1], 2) +
                     std::pow(a.center[2] - b.center[2], 2);
  const int jextra = kind == OneElectron::Kinetic ? 2 : 0;
  const auto& hi = hermite_index();
  Hermite1D hx, hy, hz;
  std::array<double, kMaxPairHermite> r0{};
  std::array<double, kMaxPairL + 1> fm{};

  for (std::size_t pa = 0; pa < a.nprim(); ++pa) {
    for (std::size_t pb = 0; pb < b.nprim(); ++pb) {
      const double alpha = a.exponents[pa], beta = b.exponents[pb];
      const double p = alpha + beta;
      const double k = a.coefficients[pa] * b.coefficients[pb] * std::exp(-alpha * beta / p * ab2);
      Vec3 pc;
      for (int d = 0; d < 3; ++d) pc[d] = (alpha * a.center[d] + beta * b.center[d]) / p;
      hermite_1d(a.l, b.l + jextra, p, pc[0] - a.center[0], pc[0] - b.center[0], hx);
      hermite_1d(a.l, b.l + jextra, p, pc[1] - a.center[1], pc[1] - b.center[1], hy);
      hermite_1d(a.l, b.l + jextra, p, pc[2] - a.center[2], pc[2] - b.center[2], hz);
      const double s1 = std::sqrt(std::numbers::pi / p);

      for (int fa = 0; fa < a.width(); ++fa) {
        for (int fb = 0; fb < b.width(); ++fb) {
          const auto& A = ca[fa];
          const auto& B = cb[fb];
          const double scale = k * a.component_scale[fa] * b.component_scale[fb];
          double val = 0.0;
          if (kind == OneElectron::Overlap) {
            val = hx.e[A.x][B.x][0] * hy.e[A.y][B.y][0] * hz.e[A.z][B.z][0] * s1 * s1 * s1;
          } else if (kind == OneElectron::Kinetic) {
            auto kin1d = [&](const Hermite1D& h, int i, int j) {
              double t = -2.0 * beta * beta * h.e[i][j + 2][0] + beta * (2 * j + 1) * h.e[i][j][0];
              if (j >= 2) t -= 0.5 * j * (j - 1) * h.e[i][j - 2][0];
              return t * s1;
            };
            const double sx = hx.e[A.x][B.x][0] * s1, sy = hy.e[A.y][B.y][0] * s1, sz = hz.e[A.z][B.z][0] * s1;
            val = kin1d(hx, A.x, B.x) * sy * sz + sx * kin1d(hy, A.y, B.y) * sz + sx * sy * kin1d(hz, A.z, B.z);
          } else {
            const int l = a.l + b.l;
            for (const auto& c : charges) {
              if (c.charge == 0.0) continue;
              const Vec3 r{pc[0] - c.position[0], pc[1] - c.position[1], pc[2] - c.position[2]};
              boys_array(l, p * (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]), fm.data());
              hermite_coulomb(l, p, r, fm.data(), r0.data());
              double acc = 0.0;
              for (int h = 0; h < hermite_count(l); ++h) {
                const int t = hi.t[h], u = hi.u[h], v = hi.v[h];
                if (t > A.x + B.x || u > A.y + B.y || v > A.z + B.z) continue;
                acc += hx.e[A.x][B.x][t] * hy.e[A.y][B.y][u] * hz.e[A.z][B.z][v] * r0[h];
              }
              val -= c.charge * 2.0 * std::numbers::pi / p * acc;
            }
          }
          out(static_cast<std::size_t>(fa), static_cast<std::size_t>(fb)) += scale * val;
        }
      }
    }
  }
  return out;
}

template <class BlockFn>
SymMatrix assemble(const BasisSet& basis, BlockFn block) {
  SymMatrix m(basis.n_bf());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const Matrix blk = block(basis[i], basis[j]);
      const auto oi = static_cast<std::size_t>(basis[i].bf_offset), oj = static_cast<std::size_t>(basis[j].bf_offset);
      for (std::size_t a = 0; a < blk.rows(); ++a)
        for (std::size_t b = 0; b < blk.cols(); ++b)
          if (i != j || b <= a) m.set(oi + a, oj + b, blk(a, b));
    }
  }
  return m;
}

} // namespace detail

inline Matrix overlap_block(const Shell& a, const Shell& b) {
  return detail::one_electron_block(a, b, detail::OneElectron::Overlap, {});
}

inline Matrix kinetic_block(const Shell& a, const Shell& b) {
  return detail::one_electron_block(a, b, detail::OneElectron::Kinetic, {});
}

inline Matrix nuclear_block(const Shell& a, const Shell& b, std::span<const PointCharge> charges) {
  return detail::one_electron_block(a, b, detail::OneElectron::Nuclear, charges);
}

inline Matrix nuclear_block(const Shell& a, const Shell& b, const Molecule& mol) {
  const auto charges = nuclear_charges(mol);
  return nuclear_block(a, b, charges);
}

inline SymMatrix overlap_matrix(const BasisSet& basis) {
  return detail::assemble(basis, [](const Shell& a, const Shell& b) { return overlap_block(a, b); });
}

inline SymMatrix kinetic_matrix(const BasisSet& basis) {
  return detail::assemble(basis, [](const Shell& a, const Shell& b) { return kinetic_block(a, b); });
}

inline SymMatrix nuclear_matrix(const BasisSet& basis, std::span<const PointCharge> charges) {
  return detail::assemble(basis, [&](const Shell& a, const Shell& b) { return nuclear_block(a, b, charges); });
}

inline SymMatrix nuclear_matrix(const BasisSet& basis, const Molecule& mol) {
  const auto charges = nuclear_charges(mol);
  return nuclear_matrix(basis, charges);
}

// ---------------------------------------------------------------------------
// Cauchy-Schwarz screening

inline constexpr double kDefaultScreenThreshold = 1e-10;

/// Q(i,j) = sqrt(max over functions of (ij|ij)).
class SchwarzTable {
 public:
  SchwarzTable() = default;
  explicit SchwarzTable(const EriEngine& engine) : n_(engine.n_shells()), q_(n_ * n_, 0.0) {
    const int maxw = engine.basis().max_width();
    std::vector<double> buf(static_cast<std::size_t>(maxw * maxw * maxw * maxw));
    EriScratch s;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        const auto& pr = engine.pair(i, j);
        compute_eri(pr, pr, buf.data(), s);
        double m = 0.0;
        for (int ab = 0; ab < pr.nab; ++ab) m = std::max(m, buf[static_cast<std::size_t>(ab * pr.nab + ab)]);
        const double q = std::sqrt(std::max(m, 0.0));
        q_[i * n_ + j] = q;
        q_[j * n_ + i] = q;
        q_max_ = std::max(q_max_, q);
      }
    }
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return q_[i * n_ + j]; }
  double max() const noexcept { return q_max_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> q_;
  double q_max_ = 0.0;
};

inline SchwarzTable schwarz_table(const EriEngine& engine) { return SchwarzTable(engine); }

/// True iff Q(i,j) Q(k,l) < tau.
inline bool is_screened(std::size_t i, std::size_t j, std::size_t k, std::size_t l, const SchwarzTable& q, double tau) {
  if (!(tau > 0.0)) throw Error("is_screened: threshold must be positive");
  return q(i, j) * q(k, l) < tau;
}

/// Pair-level test: true iff Q(i,j) Q_max < tau.
inline bool is_pair_screened(std::size_t i, std::size_t j, const SchwarzTable& q, double tau) {
  if (!(tau > 0.0)) throw Error("is_pair_screened: threshold must be positive");
  return q(i, j) * q.max() < tau;
}

} // namespace fockforge
