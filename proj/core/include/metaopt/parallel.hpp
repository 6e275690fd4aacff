#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace metaopt {

/// Fixed-size fork-join pool. `run` executes one task per worker (worker 0 is
/// the calling thread) and returns after all of them finish. The first
/// exception, ordered by worker index, is rethrown on the caller.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const noexcept { return size_; }

  void run(const std::function<void(std::size_t worker)>& task);

 private:
  void loop(std::size_t worker);

  std::size_t size_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::vector<std::exception_ptr> errors_;
  std::size_t generation_ = 0;
  std::size_t pending_ = 0;
  bool stopping_ = false;
};

/// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
};

/// Splits [0, total) into contiguous blocks of ceil(total / parts) items.
/// Returns fewer than `parts` ranges when the division leaves nothing over.
std::vector<IndexRange> contiguous_blocks(std::size_t total, std::size_t parts);

}  // namespace metaopt
