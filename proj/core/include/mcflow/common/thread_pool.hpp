#pragma once

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mcflow {

/// Fixed-size pool of workers. `run` executes a job on every worker and
/// returns once all of them finished, so consecutive calls are separated by
/// an implicit barrier. Worker 0 is the calling thread.
class ThreadPool {
 public:
  explicit ThreadPool(int workers);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  [[nodiscard]] int size() const noexcept { return workers_; }

  /// Calls job(w) once for every worker index w in [0, size()).
  /// The first exception thrown by any worker is rethrown here.
  void run(const std::function<void(int)>& job);

 private:
  void worker_loop(int index);

  int workers_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* job_ = nullptr;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

/// Runs job(w) for w in [0, n) on `pool` when given (strided over its
/// workers), otherwise sequentially in ascending order.
void for_each_worker(ThreadPool* pool, int n, const std::function<void(int)>& job);

}  // namespace mcflow
