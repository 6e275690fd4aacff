#include "metaopt/parallel.hpp"

#include <algorithm>

#include "metaopt/errors.hpp"

namespace metaopt {

WorkerPool::WorkerPool(std::size_t workers) : size_(workers) {
  if (workers == 0) throw ConfigError("worker count must be at least 1");
  errors_.resize(workers);
  threads_.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    threads_.emplace_back([this, w] { loop(w); });
  }
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::run(const std::function<void(std::size_t)>& task) {
  {
    std::lock_guard lock(mutex_);
    task_ = &task;
    std::fill(errors_.begin(), errors_.end(), nullptr);
    pending_ = size_ - 1;
    ++generation_;
  }
  start_cv_.notify_all();

  try {
    task(0);
  } catch (...) {
    errors_[0] = std::current_exception();
  }

  std::unique_lock lock(mutex_);
  done_cv_.wait(lock, [this] { return pending_ == 0; });
  task_ = nullptr;
  for (auto& e : errors_) {
    if (e) std::rethrow_exception(e);
  }
}

void WorkerPool::loop(std::size_t worker) {
  std::size_t seen = 0;
  for (;;) {
    const std::function<void(std::size_t)>* task = nullptr;
    {
      std::unique_lock lock(mutex_);
      start_cv_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
      task = task_;
    }
    std::exception_ptr error;
    try {
      (*task)(worker);
    } catch (...) {
      error = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      errors_[worker] = error;
      if (--pending_ == 0) done_cv_.notify_one();
    }
  }
}

std::vector<IndexRange> contiguous_blocks(std::size_t total, std::size_t parts) {
  std::vector<IndexRange> blocks;
  if (total == 0 || parts == 0) return blocks;
  const std::size_t block = (total + parts - 1) / parts;
  for (std::size_t begin = 0; begin < total; begin += block) {
    blocks.push_back({begin, std::min(total, begin + block)});
  }
  return blocks;
}

}  // namespace metaopt
