#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "spchar/csr.hpp"

namespace spchar {

struct ExecConfig {
  index_t threads = 1;
  // Rows handed to a worker per grab from the shared batch queue.
  index_t team_work_size = 16;
};

namespace detail {

class FirstError {
public:
  void capture() {
    std::lock_guard lock(mu_);
    if (!error_) error_ = std::current_exception();
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

private:
  std::mutex mu_;
  std::exception_ptr error_;
};

template <class Worker>
void run_workers(unsigned count, Worker&& worker) {
  detail::FirstError err;
  auto guarded = [&](unsigned w) {
    try {
      worker(w);
    } catch (...) {
      err.capture();
    }
  };
  if (count <= 1) {
    guarded(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count - 1);
    for (unsigned w = 1; w < count; ++w) pool.emplace_back(guarded, w);
    guarded(0);
  }
  err.rethrow();
}

}  // namespace detail

/// body(begin, end, worker) over batches of `grain` items pulled from a
/// shared counter.
template <class Body>
void parallel_batches(std::size_t n, std::size_t grain, unsigned threads, Body&& body) {
  grain = std::max<std::size_t>(grain, 1);
  const std::size_t batches = (n + grain - 1) / grain;
  const unsigned workers = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, batches)));
  std::atomic<std::size_t> next{0};
  detail::run_workers(workers, [&](unsigned w) {
    for (std::size_t b = next.fetch_add(1); b < batches; b = next.fetch_add(1)) {
      const std::size_t begin = b * grain;
      body(begin, std::min(n, begin + grain), w);
    }
  });
}

/// body(begin, end, worker) once per chunk of a static row partition.
template <class Body>
void parallel_partition(const RowPartition& part, Body&& body) {
  detail::run_workers(part.thread_count, [&](unsigned w) {
    if (part.boundaries[w] < part.boundaries[w + 1]) body(part.boundaries[w], part.boundaries[w + 1], w);
  });
}

/// fn(i) for i in [0, n), at most `threads` at a time.
template <class Fn>
void parallel_for_each_index(std::size_t n, unsigned threads, Fn&& fn) {
  parallel_batches(n, 1, threads, [&](std::size_t b, std::size_t e, unsigned) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace spchar
