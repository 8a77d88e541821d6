#pragma once

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <new>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "fockforge/dist.hpp"
#include "fockforge/error.hpp"
#include "fockforge/integrals.hpp"
#include "fockforge/matrix.hpp"

namespace fockforge {

enum class Strategy { ReferenceSerial, Replicated, PrivateFock, SharedFock };
enum class Schedule { Dynamic, StaticDeterministic };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::ReferenceSerial: return "reference";
    case Strategy::Replicated: return "replicated";
    case Strategy::PrivateFock: return "private-fock";
    case Strategy::SharedFock: return "shared-fock";
  }
  return "?";
}

inline std::string_view to_string(Schedule s) { return s == Schedule::Dynamic ? "dynamic" : "static"; }

inline std::optional<Strategy> parse_strategy(std::string_view s) {
  if (s == "reference" || s == "reference-serial" || s == "serial") return Strategy::ReferenceSerial;
  if (s == "replicated" || s == "mpi") return Strategy::Replicated;
  if (s == "private-fock" || s == "private") return Strategy::PrivateFock;
  if (s == "shared-fock" || s == "shared") return Strategy::SharedFock;
  return std::nullopt;
}

inline std::optional<Schedule> parse_schedule(std::string_view s) {
  if (s == "dynamic") return Schedule::Dynamic;
  if (s == "static" || s == "static-deterministic") return Schedule::StaticDeterministic;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Triangular pair indexing: (0,0) (1,0) (1,1) (2,0) ...

inline std::size_t tri_encode(std::size_t i, std::size_t j) {
  if (j > i) throw Error("tri_encode: requires j <= i");
  return i * (i + 1) / 2 + j;
}

inline std::pair<std::size_t, std::size_t> tri_decode(std::size_t ij) {
  auto i = static_cast<std::size_t>((std::sqrt(8.0 * static_cast<double>(ij) + 1.0) - 1.0) / 2.0);
  while (i * (i + 1) / 2 > ij) --i;
  while ((i + 1) * (i + 2) / 2 <= ij) ++i;
  return {i, ij - i * (i + 1) / 2};
}

/// Checked variant for a pair space over n shells.
inline std::pair<std::size_t, std::size_t> tri_decode(std::size_t ij, std::size_t n) {
  if (ij >= n * (n + 1) / 2) throw Error("tri_decode: index " + std::to_string(ij) + " out of range");
  return tri_decode(ij);
}

// ---------------------------------------------------------------------------
// Instrumentation

struct QuartetVisit {
  int i = 0, j = 0, k = 0, l = 0;
  int rank = 0, thread = 0;
  std::uint64_t phase = 0;  // per-rank top-level task counter
  friend bool operator==(const QuartetVisit&, const QuartetVisit&) = default;
};

/// Optional recorder for tests. Collection is merged under a lock at the
/// end of each worker, so it does not perturb the build's synchronization.
class FockTrace {
 public:
  void merge(std::vector<QuartetVisit>&& v, std::uint64_t screened) {
    std::lock_guard lk(mu_);
    visits_.insert(visits_.end(), v.begin(), v.end());
    screened_ += screened;
  }
  const std::vector<QuartetVisit>& visits() const noexcept { return visits_; }
  std::uint64_t screened() const noexcept { return screened_; }
  void clear() {
    visits_.clear();
    screened_ = 0;
  }

 private:
  std::mutex mu_;
  std::vector<QuartetVisit> visits_;
  std::uint64_t screened_ = 0;
};

inline constexpr int kMaxThreads = 256;
inline constexpr std::size_t kDefaultPadding = 16;

struct FockOptions {
  Strategy strategy = Strategy::SharedFock;
  Schedule schedule = Schedule::Dynamic;
  int threads = 1;
  double tau = kDefaultScreenThreshold;  // 0 disables screening
  std::size_t padding = kDefaultPadding;
  FockTrace* trace = nullptr;
};

// ---------------------------------------------------------------------------
// Per-thread block buffers

/// Column-per-thread accumulation buffer for the rows of one shell block.
/// Entry (nu, mu) of thread t lives at column(t)[mu * n_bf + nu]; the column
/// stride is rounded up to the padding quantum so columns never share a
/// cache line.
class BlockBuffer {
 public:
  BlockBuffer(std::size_t n_bf, int max_width, int n_threads, std::size_t quantum = kDefaultPadding)
      : n_bf_(n_bf), max_width_(max_width), n_threads_(n_threads) {
    if (n_threads < 1) throw Error("BlockBuffer: thread count must be positive");
    if (quantum == 0) throw Error("BlockBuffer: padding quantum must be positive");
    const std::size_t rows = n_bf * static_cast<std::size_t>(max_width);
    ld_ = (rows + quantum - 1) / quantum * quantum;
    const std::size_t count = ld_ * static_cast<std::size_t>(n_threads);
    data_.reset(static_cast<double*>(::operator new[](std::max<std::size_t>(count, 1) * sizeof(double), std::align_val_t(64))));
    std::fill(data_.get(), data_.get() + count, 0.0);
  }

  std::size_t n_bf() const noexcept { return n_bf_; }
  int max_width() const noexcept { return max_width_; }
  int n_threads() const noexcept { return n_threads_; }
  std::size_t leading_dimension() const noexcept { return ld_; }

  double* column(int t) noexcept { return data_.get() + static_cast<std::size_t>(t) * ld_; }
  const double* column(int t) const noexcept { return data_.get() + static_cast<std::size_t>(t) * ld_; }

  void add(int t, int mu, std::size_t nu, double w) noexcept { column(t)[static_cast<std::size_t>(mu) * n_bf_ + nu] += w; }

  /// Shell currently accumulated, -1 when empty.
  int shell = -1;

 private:
  struct Free {
    void operator()(double* p) const noexcept { ::operator delete[](p, std::align_val_t(64)); }
  };

  std::size_t n_bf_;
  int max_width_;
  int n_threads_;
  std::size_t ld_ = 0;
  std::unique_ptr<double, Free> data_;
};

/// Worker team with a reusable barrier. A throwing worker marks the team
/// failed and drops out; the rest leave at their next sync().
class ThreadTeam {
 public:
  explicit ThreadTeam(int n) : n_(n), barrier_(n) {
    if (n < 1 || n > kMaxThreads) throw Error("invalid thread count " + std::to_string(n));
  }

  int size() const noexcept { return n_; }

  void sync() {
    barrier_.arrive_and_wait();
    if (failed_.load(std::memory_order_acquire)) throw Aborted();
  }

  /// Runs fn(tid) on every member; tid 0 runs on the calling thread.
  template <class Fn>
  void run(Fn&& fn) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_));
    auto body = [&](int t) {
      try {
        fn(t);
      } catch (const Aborted&) {
        barrier_.arrive_and_drop();
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
        failed_.store(true, std::memory_order_release);
        barrier_.arrive_and_drop();
      }
    };
    {
      std::vector<std::jthread> workers;
      workers.reserve(static_cast<std::size_t>(n_ - 1));
      for (int t = 1; t < n_; ++t) workers.emplace_back(body, t);
      body(0);
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

 private:
  struct Aborted {};
  int n_;
  std::barrier<> barrier_;
  std::atomic<bool> failed_{false};
};

namespace detail {

// Pairwise sum over thread columns; fixed order for a given thread count.
inline double column_sum(const BlockBuffer& buf, std::size_t e, double* tmp) {
  const int n = buf.n_threads();
  for (int t = 0; t < n; ++t) tmp[t] = buf.column(t)[e];
  for (int stride = 1; stride < n; stride *= 2)
    for (int t = 0; t + stride < n; t += 2 * stride) tmp[t] += tmp[t + stride];
  return tmp[0];
}

} // namespace detail

/// Collective over the team: adds the thread-summed buffer for the shell
/// block [offset, offset+width) into F symmetrically, then zeroes the
/// buffer. Entries are split into contiguous chunks, one per thread. For a
/// partner entry inside the block, the owner of (nu, mu) writes F(mu, nu)
/// from both entries so every element of F has a single writer.
inline void flush_buffer(BlockBuffer& buf, Matrix& f, int offset, int width, int tid, ThreadTeam& team) {
  const std::size_t n = buf.n_bf();
  const auto o = static_cast<std::size_t>(offset);
  const auto w = static_cast<std::size_t>(width);
  const std::size_t total = n * w;
  const auto t = static_cast<std::size_t>(tid);
  const auto nt = static_cast<std::size_t>(team.size());
  double tmp[kMaxThreads];

  team.sync();
  const std::size_t begin = total * t / nt, end = total * (t + 1) / nt;
  double* fd = f.data().data();
  for (std::size_t e = begin; e < end; ++e) {
    const std::size_t mu = e / n, nu = e % n;
    const double s = detail::column_sum(buf, e, tmp);
    if (nu >= o && nu < o + w) {
      const double partner = detail::column_sum(buf, (nu - o) * n + o + mu, tmp);
      fd[(o + mu) * n + nu] += 0.5 * (s + partner);
    } else {
      if (s == 0.0) continue;
      fd[(o + mu) * n + nu] += 0.5 * s;
      fd[nu * n + o + mu] += 0.5 * s;
    }
  }
  team.sync();
  std::fill(buf.column(tid), buf.column(tid) + total, 0.0);
}

// ---------------------------------------------------------------------------
// Quartet contraction

namespace detail {

struct QuartetShape {
  std::size_t oi, oj, ok, ol;
  int wi, wj, wk, wl;
};

inline QuartetShape quartet_shape(const BasisSet& b, std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
  return {static_cast<std::size_t>(b[i].bf_offset), static_cast<std::size_t>(b[j].bf_offset),
          static_cast<std::size_t>(b[k].bf_offset), static_cast<std::size_t>(b[l].bf_offset),
          b[i].width(), b[j].width(), b[k].width(), b[l].width()};
}

inline double degeneracy(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
  return (i == j ? 1.0 : 2.0) * (k == l ? 1.0 : 2.0) * ((i == k && j == l) ? 1.0 : 2.0);
}

/// Closed-shell contribution of one canonical quartet, D including the
/// factor 2. The sink receives unsymmetrized increments:
///   add_i(a, nu, w): F(i_a, nu) += w   (columns in blocks j, k, l)
///   add_j(b, nu, w): F(j_b, nu) += w   (columns in blocks k, l)
///   add_kl(c, d, w): F(k_c, l_d) += w
/// and is responsible for symmetrizing, i.e. each increment counts half
/// toward F(x, y) and half toward F(y, x).
template <class Sink>
inline void contract_quartet(const QuartetShape& s, double deg, const double* eri, const double* d, std::size_t n,
                             Sink& sink) {
  constexpr int W = kMaxShellWidth * kMaxShellWidth;
  double dab[W], dcd[W], dac[W], dad[W], dbc[W], dbd[W];
  double jab[W]{}, jcd[W]{}, kac[W]{}, kad[W]{}, kbc[W]{}, kbd[W]{};
  auto gather = [&](double* out, std::size_t r0, int nr, std::size_t c0, int nc) {
    for (int r = 0; r < nr; ++r)
      for (int c = 0; c < nc; ++c) out[r * nc + c] = d[(r0 + static_cast<std::size_t>(r)) * n + c0 + static_cast<std::size_t>(c)];
  };
  gather(dab, s.oi, s.wi, s.oj, s.wj);
  gather(dcd, s.ok, s.wk, s.ol, s.wl);
  gather(dac, s.oi, s.wi, s.ok, s.wk);
  gather(dad, s.oi, s.wi, s.ol, s.wl);
  gather(dbc, s.oj, s.wj, s.ok, s.wk);
  gather(dbd, s.oj, s.wj, s.ol, s.wl);

  const double* v = eri;
  for (int a = 0; a < s.wi; ++a) {
    for (int b = 0; b < s.wj; ++b) {
      const double d_ab = dab[a * s.wj + b];
      double j_ab = 0.0;
      for (int c = 0; c < s.wk; ++c) {
        const double d_ac = dac[a * s.wk + c], d_bc = dbc[b * s.wk + c];
        double k_ac = 0.0, k_bc = 0.0;
        for (int l = 0; l < s.wl; ++l, ++v) {
          const double x = deg * *v;
          j_ab += dcd[c * s.wl + l] * x;
          jcd[c * s.wl + l] += d_ab * x;
          k_ac += dbd[b * s.wl + l] * x;
          kbd[b * s.wl + l] += d_ac * x;
          kad[a * s.wl + l] += d_bc * x;
          k_bc += dad[a * s.wl + l] * x;
        }
        kac[a * s.wk + c] += k_ac;
        kbc[b * s.wk + c] += k_bc;
      }
      jab[a * s.wj + b] += j_ab;
    }
  }

  for (int a = 0; a < s.wi; ++a) {
    for (int b = 0; b < s.wj; ++b) sink.add_i(a, s.oj + b, 0.5 * jab[a * s.wj + b]);
    for (int c = 0; c < s.wk; ++c) sink.add_i(a, s.ok + c, -0.125 * kac[a * s.wk + c]);
    for (int l = 0; l < s.wl; ++l) sink.add_i(a, s.ol + l, -0.125 * kad[a * s.wl + l]);
  }
  for (int b = 0; b < s.wj; ++b) {
    for (int c = 0; c < s.wk; ++c) sink.add_j(b, s.ok + c, -0.125 * kbc[b * s.wk + c]);
    for (int l = 0; l < s.wl; ++l) sink.add_j(b, s.ol + l, -0.125 * kbd[b * s.wl + l]);
  }
  for (int c = 0; c < s.wk; ++c)
    for (int l = 0; l < s.wl; ++l) sink.add_kl(c, l, 0.5 * jcd[c * s.wl + l]);
}

// Writes into a private unsymmetrized matrix; symmetrized once at the end.
struct PrivateSink {
  double* g;
  std::size_t n;
  QuartetShape s;
  void add_i(int a, std::size_t nu, double w) { g[(s.oi + static_cast<std::size_t>(a)) * n + nu] += w; }
  void add_j(int b, std::size_t nu, double w) { g[(s.oj + static_cast<std::size_t>(b)) * n + nu] += w; }
  void add_kl(int c, int d, double w) { g[(s.ok + static_cast<std::size_t>(c)) * n + s.ol + static_cast<std::size_t>(d)] += w; }
};

// F_I / F_J columns of the calling thread plus direct symmetric writes of
// the (k,l) block into the shared matrix.
struct SharedSink {
  double* fi;
  double* fj;
  double* f;
  std::size_t n;
  QuartetShape s;
  void add_i(int a, std::size_t nu, double w) { fi[static_cast<std::size_t>(a) * n + nu] += w; }
  void add_j(int b, std::size_t nu, double w) { fj[static_cast<std::size_t>(b) * n + nu] += w; }
  void add_kl(int c, int d, double w) {
    const std::size_t x = s.ok + static_cast<std::size_t>(c), y = s.ol + static_cast<std::size_t>(d);
    f[x * n + y] += 0.5 * w;
    f[y * n + x] += 0.5 * w;
  }
};

/// Per-thread state shared by every strategy.
class Worker {
 public:
  Worker(const EriEngine& engine, const SchwarzTable& q, const FockOptions& opt, int rank, int thread)
      : engine_(engine),
        q_(q),
        tau_(opt.tau),
        trace_(opt.trace),
        rank_(rank),
        thread_(thread),
        eri_(static_cast<std::size_t>(std::pow(engine.basis().max_width(), 4))) {}

  bool screened(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    if (tau_ > 0.0 && q_(i, j) * q_(k, l) < tau_) {
      ++n_screened_;
      return true;
    }
    return false;
  }

  bool pair_screened(std::size_t i, std::size_t j) const { return tau_ > 0.0 && q_(i, j) * q_.max() < tau_; }

  /// Computes the quartet and returns its shape; values in eri().
  QuartetShape compute(std::size_t i, std::size_t j, std::size_t k, std::size_t l, std::uint64_t phase) {
    engine_.compute(i, j, k, l, eri_.data(), scratch_);
    if (trace_)
      log_.push_back({static_cast<int>(i), static_cast<int>(j), static_cast<int>(k), static_cast<int>(l), rank_, thread_, phase});
    return quartet_shape(engine_.basis(), i, j, k, l);
  }

  const double* eri() const noexcept { return eri_.data(); }

  void finish() {
    if (trace_) trace_->merge(std::move(log_), n_screened_);
    log_.clear();
    n_screened_ = 0;
  }

 private:
  const EriEngine& engine_;
  const SchwarzTable& q_;
  double tau_;
  FockTrace* trace_;
  int rank_, thread_;
  std::vector<double> eri_;
  EriScratch scratch_;
  std::vector<QuartetVisit> log_;
  std::uint64_t n_screened_ = 0;
};

// All (k, l) of the canonical enumeration for a fixed (i, j).
template <class Fn>
inline void for_each_kl(std::size_t i, std::size_t j, Fn&& fn) {
  for (std::size_t k = 0; k <= i; ++k) {
    const std::size_t lmax = (k == i) ? j : k;
    for (std::size_t l = 0; l <= lmax; ++l) fn(k, l);
  }
}

inline void check_inputs(const SymMatrix& d, const EriEngine& engine, const FockOptions& opt) {
  if (d.size() != engine.basis().n_bf())
    throw DimensionError("fock build: density is " + std::to_string(d.size()) + "x" + std::to_string(d.size()) +
                         " but the basis has " + std::to_string(engine.basis().n_bf()) + " functions");
  if (!(opt.tau >= 0.0) || !std::isfinite(opt.tau)) throw Error("fock build: screening threshold must be >= 0");
  if (opt.threads < 1 || opt.threads > kMaxThreads)
    throw Error("fock build: thread count must be in 1.." + std::to_string(kMaxThreads));
  if (opt.padding == 0) throw Error("fock build: padding quantum must be positive");
}

// Round-robin or counter-driven task source for one consumer.
class TaskSource {
 public:
  TaskSource(Schedule sched, std::atomic<std::uint64_t>* counter, std::uint64_t first, std::uint64_t stride)
      : sched_(sched), counter_(counter), next_(first), stride_(stride) {}
  std::uint64_t next() {
    if (sched_ == Schedule::Dynamic) return counter_->fetch_add(1, std::memory_order_relaxed);
    const std::uint64_t v = next_;
    next_ += stride_;
    return v;
  }

 private:
  Schedule sched_;
  std::atomic<std::uint64_t>* counter_;
  std::uint64_t next_, stride_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Builds

/// Serial reference: every canonical quartet (i >= j, i >= k,
/// l <= (k == i ? j : k)) in order, with weight 1, 2, 4 or 8 for coincident
/// indices. Returns the two-electron part.
inline SymMatrix build_fock_reference(const SymMatrix& d, const EriEngine& engine, const SchwarzTable& q, double tau,
                                      FockTrace* trace = nullptr) {
  FockOptions opt;
  opt.strategy = Strategy::ReferenceSerial;
  opt.tau = tau;
  opt.trace = trace;
  detail::check_inputs(d, engine, opt);
  const std::size_t n = d.size(), ns = engine.n_shells();
  Matrix g(n, n);
  detail::Worker w(engine, q, opt, 0, 0);
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      detail::for_each_kl(i, j, [&](std::size_t k, std::size_t l) {
        if (w.screened(i, j, k, l)) return;
        const auto s = w.compute(i, j, k, l, tri_encode(i, j));
        detail::PrivateSink sink{g.data().data(), n, s};
        detail::contract_quartet(s, detail::degeneracy(i, j, k, l), w.eri(), d.data().data(), n, sink);
      });
  w.finish();
  return SymMatrix::symmetrized(g);
}

namespace detail {

inline SymMatrix sum_private(std::vector<Matrix>& parts) {
  for (std::size_t t = 1; t < parts.size(); ++t) parts[0] += parts[t];
  return SymMatrix::symmetrized(parts[0]);
}

// DLB over (i, j) pairs; every worker owns a private F.
inline SymMatrix build_replicated(const SymMatrix& d, const EriEngine& engine, const SchwarzTable& q,
                                  const FockOptions& opt, const Rank& rank) {
  const std::size_t n = d.size(), ns = engine.n_shells();
  const std::uint64_t n_tasks = ns * (ns + 1) / 2;
  const int nt = opt.threads;
  std::vector<Matrix> parts(static_cast<std::size_t>(nt), Matrix(n, n));
  ThreadTeam team(nt);
  auto& counter = rank.group().counter();
  team.run([&](int tid) {
    Worker w(engine, q, opt, rank.id(), tid);
    double* g = parts[static_cast<std::size_t>(tid)].data().data();
    const auto consumers = static_cast<std::uint64_t>(rank.size()) * static_cast<std::uint64_t>(nt);
    std::uint64_t fixed = static_cast<std::uint64_t>(rank.id()) * static_cast<std::uint64_t>(nt) + static_cast<std::uint64_t>(tid);
    for (;;) {
      std::uint64_t t;
      if (opt.schedule == Schedule::Dynamic) {
        t = counter.next();
      } else {
        t = fixed;
        fixed += consumers;
      }
      if (t >= n_tasks) break;
      const auto [i, j] = tri_decode(t);
      for_each_kl(i, j, [&](std::size_t k, std::size_t l) {
        if (w.screened(i, j, k, l)) return;
        const auto s = w.compute(i, j, k, l, t);
        PrivateSink sink{g, n, s};
        contract_quartet(s, degeneracy(i, j, k, l), w.eri(), d.data().data(), n, sink);
      });
    }
    w.finish();
  });
  return rank.global_sum(sum_private(parts));
}

// DLB over i on the master thread; threads share the collapsed (j, k) loop.
inline SymMatrix build_private(const SymMatrix& d, const EriEngine& engine, const SchwarzTable& q,
                               const FockOptions& opt, const Rank& rank) {
  const std::size_t n = d.size(), ns = engine.n_shells();
  const int nt = opt.threads;
  std::vector<Matrix> parts(static_cast<std::size_t>(nt), Matrix(n, n));
  ThreadTeam team(nt);
  auto& counter = rank.group().counter();
  // Double-buffered by iteration parity so the master can publish the next
  // task while slower threads are still reading the current one.
  std::uint64_t slot[2] = {0, 0};
  std::atomic<std::uint64_t> inner[2];
  std::uint64_t rank_next = static_cast<std::uint64_t>(rank.id());

  team.run([&](int tid) {
    Worker w(engine, q, opt, rank.id(), tid);
    double* g = parts[static_cast<std::size_t>(tid)].data().data();
    for (std::uint64_t iter = 0;; ++iter) {
      const int p = static_cast<int>(iter & 1);
      if (tid == 0) {
        if (opt.schedule == Schedule::Dynamic) {
          slot[p] = counter.next();
        } else {
          slot[p] = rank_next;
          rank_next += static_cast<std::uint64_t>(rank.size());
        }
        inner[p].store(0, std::memory_order_relaxed);
      }
      team.sync();
      const std::uint64_t i = slot[p];
      if (i >= ns) break;
      const std::uint64_t width = i + 1, n_iter = width * width;
      TaskSource src(opt.schedule, &inner[p], static_cast<std::uint64_t>(tid), static_cast<std::uint64_t>(nt));
      for (std::uint64_t m = src.next(); m < n_iter; m = src.next()) {
        const std::size_t j = m / width, k = m % width;
        const std::size_t lmax = (k == i) ? j : k;
        for (std::size_t l = 0; l <= lmax; ++l) {
          if (w.screened(i, j, k, l)) continue;
          const auto s = w.compute(i, j, k, l, iter);
          PrivateSink sink{g, n, s};
          contract_quartet(s, degeneracy(i, j, k, l), w.eri(), d.data().data(), n, sink);
        }
      }
    }
    w.finish();
  });
  return rank.global_sum(sum_private(parts));
}

// DLB over combined ij; threads share the kl loop and a single F with
// per-thread F_I / F_J block buffers.
inline SymMatrix build_shared(const SymMatrix& d, const EriEngine& engine, const SchwarzTable& q,
                              const FockOptions& opt, const Rank& rank) {
  const BasisSet& basis = engine.basis();
  const std::size_t n = d.size(), ns = engine.n_shells();
  const std::uint64_t n_tasks = ns * (ns + 1) / 2;
  const int nt = opt.threads;
  Matrix f(n, n);
  BlockBuffer fi(n, basis.max_width(), nt, opt.padding), fj(n, basis.max_width(), nt, opt.padding);
  ThreadTeam team(nt);
  auto& counter = rank.group().counter();
  std::uint64_t slot[2] = {0, 0};
  std::atomic<std::uint64_t> inner[2];
  std::uint64_t rank_next = static_cast<std::uint64_t>(rank.id());

  team.run([&](int tid) {
    Worker w(engine, q, opt, rank.id(), tid);
    int i_old = -1;  // per-thread copy; identical on every thread
    for (std::uint64_t iter = 0;; ++iter) {
      const int p = static_cast<int>(iter & 1);
      if (tid == 0) {
        if (opt.schedule == Schedule::Dynamic) {
          slot[p] = counter.next();
        } else {
          slot[p] = rank_next;
          rank_next += static_cast<std::uint64_t>(rank.size());
        }
        inner[p].store(0, std::memory_order_relaxed);
      }
      team.sync();
      const std::uint64_t ij = slot[p];
      if (ij >= n_tasks) break;
      const auto [i, j] = tri_decode(ij);
      if (w.pair_screened(i, j)) continue;

      if (static_cast<int>(i) != i_old && i_old >= 0) {
        const Shell& old = basis[static_cast<std::size_t>(i_old)];
        flush_buffer(fi, f, old.bf_offset, old.width(), tid, team);
      }
      const std::uint64_t kl_count = ij + 1;
      TaskSource src(opt.schedule, &inner[p], static_cast<std::uint64_t>(tid), static_cast<std::uint64_t>(nt));
      for (std::uint64_t kl = src.next(); kl < kl_count; kl = src.next()) {
        const auto [k, l] = tri_decode(kl);
        if (w.screened(i, j, k, l)) continue;
        const auto s = w.compute(i, j, k, l, iter);
        SharedSink sink{fi.column(tid), fj.column(tid), f.data().data(), n, s};
        contract_quartet(s, degeneracy(i, j, k, l), w.eri(), d.data().data(), n, sink);
      }
      flush_buffer(fj, f, basis[j].bf_offset, basis[j].width(), tid, team);
      i_old = static_cast<int>(i);
    }
    if (i_old >= 0) {
      const Shell& old = basis[static_cast<std::size_t>(i_old)];
      flush_buffer(fi, f, old.bf_offset, old.width(), tid, team);
    }
    w.finish();
  });
  return rank.global_sum(SymMatrix::symmetrized(f));
}

} // namespace detail

/// Two-electron Fock matrix on one rank of a group. Every rank of the group
/// must call this collectively with identical arguments; all ranks return
/// the same summed matrix.
inline SymMatrix build_fock(const SymMatrix& d, const EriEngine& engine, const SchwarzTable& q, const FockOptions& opt,
                            const Rank& rank) {
  detail::check_inputs(d, engine, opt);
  if (opt.strategy == Strategy::ReferenceSerial) return build_fock_reference(d, engine, q, opt.tau, opt.trace);
  rank.dlb_reset();
  switch (opt.strategy) {
    case Strategy::Replicated: return detail::build_replicated(d, engine, q, opt, rank);
    case Strategy::PrivateFock: return detail::build_private(d, engine, q, opt, rank);
    case Strategy::SharedFock: return detail::build_shared(d, engine, q, opt, rank);
    case Strategy::ReferenceSerial: break;
  }
  throw Error("build_fock: unknown strategy");
}

/// Convenience: runs the build on n_ranks in-process ranks.
inline SymMatrix build_fock(const SymMatrix& d, const EriEngine& engine, const SchwarzTable& q, const FockOptions& opt,
                            int n_ranks = 1) {
  detail::check_inputs(d, engine, opt);
  if (opt.strategy == Strategy::ReferenceSerial) return build_fock_reference(d, engine, q, opt.tau, opt.trace);
  auto results = spawn(n_ranks, [&](Rank r) { return build_fock(d, engine, q, opt, r); });
  return std::move(results.front());
}

} // namespace fockforge
