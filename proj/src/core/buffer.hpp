#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>

#include "core/domain.hpp"

namespace cadet {

// Deterministic task seed for producer stream d at a given counter.
uint64_t task_seed(uint64_t run_seed, int d, int64_t counter);

// Generates the task for (run_seed, d, counter): draws n from `n_choices`,
// then simulates a (graph, dataset) pair from the domain.
Task generate_task(const DomainConfig& domain, int d, const std::vector<int64_t>& n_choices,
                   uint64_t run_seed, int64_t counter);

// Per-d FIFO queues with fixed capacity. All operations lock; the trainer and
// any producer threads share one buffer. In the single-threaded mode the
// trainer itself refills queues, which keeps runs bit-reproducible.
class TaskBuffer {
 public:
  explicit TaskBuffer(int64_t capacity) : capacity_(capacity) {
    if (capacity < 1) raise(ErrorKind::invalid_argument, "buffer capacity must be >= 1");
  }

  // Inserts and evicts the oldest entry when full. Returns the counter used.
  int64_t insert_next(int d, const DomainConfig& domain, const std::vector<int64_t>& n_choices,
                      uint64_t run_seed);
  // Re-inserts a task with an explicit counter (checkpoint restore).
  void insert_replayed(int d, int64_t counter, Task task);

  int64_t size(int d) const;
  int64_t next_counter(int d) const;
  void set_next_counter(int d, int64_t counter);

  // `count` uniform draws with replacement; blocks until the queue is
  // non-empty (producers fill it) unless `stop()` was called.
  std::vector<Task> sample(int d, int count, Rng& rng);
  int64_t samples(int d) const;
  void set_samples(int d, int64_t count);

  std::map<int, std::vector<int64_t>> queue_counters() const;
  std::map<int, int64_t> next_counters() const;
  std::map<int, int64_t> sample_counts() const;

  void stop();
  bool stopped() const;

 private:
  struct Queue {
    std::deque<std::pair<int64_t, Task>> items;  // (counter, task): oldest first
    int64_t next_counter = 0;
    int64_t samples = 0;
  };

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<int, Queue> queues_;
  int64_t capacity_;
  bool stop_ = false;
};

}  // namespace cadet
