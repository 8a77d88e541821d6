#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <vector>

#include "fockforge/error.hpp"
#include "fockforge/matrix.hpp"

namespace fockforge {

// In-process stand-in for a message-passing job: ranks are threads of one
// process, collectives go through a shared RankGroup.

class CollectiveError : public Error {
 public:
  using Error::Error;
};

class CollectiveTimeout : public CollectiveError {
 public:
  using CollectiveError::CollectiveError;
};

class RankFailure : public Error {
 public:
  RankFailure(int rank, const std::string& what) : Error("rank " + std::to_string(rank) + ": " + what), rank_(rank) {}
  int rank() const noexcept { return rank_; }

 private:
  int rank_;
};

namespace detail {
class GroupAborted : public CollectiveError {
 public:
  GroupAborted() : CollectiveError("rank group aborted by a failure on another rank") {}
};
} // namespace detail

/// Shared monotone task counter. Within one epoch every value is issued once.
class DlbCounter {
 public:
  std::uint64_t next() noexcept { return value_.fetch_add(1, std::memory_order_relaxed); }
  std::uint64_t epoch() const noexcept { return epoch_.load(std::memory_order_acquire); }

 private:
  friend class RankGroup;
  void reset() noexcept {
    value_.store(0, std::memory_order_relaxed);
    epoch_.fetch_add(1, std::memory_order_release);
  }

  std::atomic<std::uint64_t> value_{0};
  std::atomic<std::uint64_t> epoch_{0};
};

inline constexpr std::chrono::milliseconds kDefaultCollectiveTimeout = std::chrono::hours(2);

class RankGroup {
 public:
  explicit RankGroup(int n_ranks, std::chrono::milliseconds timeout = kDefaultCollectiveTimeout)
      : n_(n_ranks), timeout_(timeout), slots_(static_cast<std::size_t>(std::max(n_ranks, 0)), nullptr) {
    if (n_ranks < 1) throw Error("rank group needs at least one rank");
  }
  RankGroup(const RankGroup&) = delete;
  RankGroup& operator=(const RankGroup&) = delete;

  int size() const noexcept { return n_; }
  std::chrono::milliseconds timeout() const noexcept { return timeout_; }
  DlbCounter& counter() noexcept { return counter_; }

  /// Blocks until all ranks arrive with the same collective tag.
  void barrier(int rank, const char* tag = "barrier") {
    check_rank(rank);
    std::unique_lock lk(mu_);
    if (aborted_) throw detail::GroupAborted();
    if (arrived_ == 0) {
      tag_ = tag;
    } else if (std::string_view(tag_) != tag) {
      abort_locked();
      throw CollectiveError(std::string("collective mismatch: rank ") + std::to_string(rank) + " called '" + tag +
                            "' while others are in '" + tag_ + "'");
    }
    const std::uint64_t gen = generation_;
    if (++arrived_ == n_) {
      arrived_ = 0;
      ++generation_;
      cv_.notify_all();
      return;
    }
    if (!cv_.wait_for(lk, timeout_, [&] { return generation_ != gen || aborted_; })) {
      abort_locked();
      throw CollectiveTimeout(std::string("collective '") + tag + "' timed out on rank " + std::to_string(rank));
    }
    if (generation_ == gen) throw detail::GroupAborted();
  }

  std::uint64_t dlb_next() noexcept { return counter_.next(); }

  /// Collective: zeroes the counter and opens a new epoch.
  void dlb_reset(int rank) {
    barrier(rank, "dlb_reset");
    if (rank == 0) counter_.reset();
    barrier(rank, "dlb_reset");
  }

  /// Element-wise sum over ranks, accumulated in rank order 0, 1, ... so
  /// every rank gets bitwise the same result.
  SymMatrix global_sum(int rank, const SymMatrix& local) {
    slots_[static_cast<std::size_t>(rank)] = &local;
    barrier(rank, "global_sum");
    for (const auto* s : slots_) {
      if (s->size() != local.size()) {
        barrier(rank, "global_sum");
        throw DimensionError("global_sum: ranks passed matrices of different dimension");
      }
    }
    SymMatrix sum = *slots_[0];
    for (std::size_t r = 1; r < slots_.size(); ++r) sum += *slots_[r];
    barrier(rank, "global_sum");
    return sum;
  }

  /// Wakes every rank blocked in a collective; they fail with GroupAborted.
  void abort() {
    std::lock_guard lk(mu_);
    abort_locked();
  }
  bool aborted() const {
    std::lock_guard lk(mu_);
    return aborted_;
  }

 private:
  void check_rank(int rank) const {
    if (rank < 0 || rank >= n_) throw Error("rank id out of range: " + std::to_string(rank));
  }
  void abort_locked() {
    aborted_ = true;
    cv_.notify_all();
  }

  int n_;
  std::chrono::milliseconds timeout_;
  DlbCounter counter_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  int arrived_ = 0;
  std::uint64_t generation_ = 0;
  const char* tag_ = "";
  bool aborted_ = false;
  std::vector<const SymMatrix*> slots_;
};

/// Per-rank view passed to spawned jobs.
class Rank {
 public:
  Rank(int id, RankGroup& group) : id_(id), group_(&group) {}

  int id() const noexcept { return id_; }
  int size() const noexcept { return group_->size(); }
  RankGroup& group() const noexcept { return *group_; }

  void barrier() const { group_->barrier(id_); }
  std::uint64_t dlb_next() const noexcept { return group_->dlb_next(); }
  void dlb_reset() const { group_->dlb_reset(id_); }
  SymMatrix global_sum(const SymMatrix& local) const { return group_->global_sum(id_, local); }

 private:
  int id_;
  RankGroup* group_;
};

/// Runs job(Rank) on n_ranks threads and returns the results in rank order.
/// A throwing rank aborts the group; the lowest-numbered original failure
/// is rethrown as RankFailure.
template <class Job>
auto spawn(RankGroup& group, Job&& job) {
  using R = std::invoke_result_t<Job&, Rank>;
  const int n = group.size();
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<bool> secondary(static_cast<std::size_t>(n), false);
  auto run_one = [&](int r, auto&& store) {
    try {
      if constexpr (std::is_void_v<R>) {
        job(Rank(r, group));
      } else {
        store(job(Rank(r, group)));
      }
    } catch (const detail::GroupAborted&) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
      secondary[static_cast<std::size_t>(r)] = true;
      group.abort();
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
      group.abort();
    }
  };

  auto finish = [&] {
    int first = -1;
    for (int r = 0; r < n; ++r)
      if (errors[static_cast<std::size_t>(r)] && !secondary[static_cast<std::size_t>(r)]) {
        first = r;
        break;
      }
    if (first < 0)
      for (int r = 0; r < n; ++r)
        if (errors[static_cast<std::size_t>(r)]) {
          first = r;
          break;
        }
    if (first < 0) return;
    try {
      std::rethrow_exception(errors[static_cast<std::size_t>(first)]);
    } catch (const std::exception& e) {
      throw RankFailure(first, e.what());
    } catch (...) {
      throw RankFailure(first, "unknown exception");
    }
  };

  if constexpr (std::is_void_v<R>) {
    {
      std::vector<std::jthread> threads;
      for (int r = 1; r < n; ++r) threads.emplace_back([&, r] { run_one(r, [](auto&&) {}); });
      run_one(0, [](auto&&) {});
    }
    finish();
  } else {
    std::vector<std::optional<R>> results(static_cast<std::size_t>(n));
    {
      std::vector<std::jthread> threads;
      for (int r = 1; r < n; ++r)
        threads.emplace_back([&, r] { run_one(r, [&](R&& v) { results[static_cast<std::size_t>(r)].emplace(std::move(v)); }); });
      run_one(0, [&](R&& v) { results[0].emplace(std::move(v)); });
    }
    finish();
    std::vector<R> out;
    out.reserve(results.size());
    for (auto& v : results) out.push_back(std::move(*v));
    return out;
  }
}

template <class Job>
auto spawn(int n_ranks, Job&& job, std::chrono::milliseconds timeout = kDefaultCollectiveTimeout) {
  RankGroup group(n_ranks, timeout);
  return spawn(group, std::forward<Job>(job));
}

} // namespace fockforge
