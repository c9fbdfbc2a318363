#include "core/buffer.hpp"

#include "core/scm.hpp"

namespace cadet {

uint64_t task_seed(uint64_t run_seed, int d, int64_t counter) {
  return mix_seed(mix_seed(mix_seed(run_seed, hash_tag("tasks")), static_cast<uint64_t>(d)),
                  static_cast<uint64_t>(counter));
}

Task generate_task(const DomainConfig& domain, int d, const std::vector<int64_t>& n_choices,
                   uint64_t run_seed, int64_t counter) {
  if (n_choices.empty()) raise(ErrorKind::invalid_argument, "no dataset sizes configured");
  Rng rng(task_seed(run_seed, d, counter));
  int64_t n = n_choices[static_cast<size_t>(rng.uniform_int(
      static_cast<int64_t>(n_choices.size())))];
  return build_task(domain, d, n, rng);
}

int64_t TaskBuffer::insert_next(int d, const DomainConfig& domain,
                                const std::vector<int64_t>& n_choices, uint64_t run_seed) {
  int64_t counter;
  {
    std::lock_guard<std::mutex> lock(mu_);
    counter = queues_[d].next_counter++;
  }
  // Simulation happens outside the lock so producers don't serialize.
  Task task = generate_task(domain, d, n_choices, run_seed, counter);
  {
    std::lock_guard<std::mutex> lock(mu_);
    Queue& q = queues_[d];
    q.items.emplace_back(counter, std::move(task));
    while (static_cast<int64_t>(q.items.size()) > capacity_) q.items.pop_front();
  }
  cv_.notify_all();
  return counter;
}

void TaskBuffer::insert_replayed(int d, int64_t counter, Task task) {
  std::lock_guard<std::mutex> lock(mu_);
  Queue& q = queues_[d];
  q.items.emplace_back(counter, std::move(task));
  while (static_cast<int64_t>(q.items.size()) > capacity_) q.items.pop_front();
}

int64_t TaskBuffer::size(int d) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = queues_.find(d);
  return it == queues_.end() ? 0 : static_cast<int64_t>(it->second.items.size());
}

int64_t TaskBuffer::next_counter(int d) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = queues_.find(d);
  return it == queues_.end() ? 0 : it->second.next_counter;
}

void TaskBuffer::set_next_counter(int d, int64_t counter) {
  std::lock_guard<std::mutex> lock(mu_);
  queues_[d].next_counter = counter;
}

std::vector<Task> TaskBuffer::sample(int d, int count, Rng& rng) {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [&] { return stop_ || !queues_[d].items.empty(); });
  Queue& q = queues_[d];
  if (q.items.empty()) raise(ErrorKind::internal, "buffer stopped while empty");
  std::vector<Task> out;
  out.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    int64_t idx = rng.uniform_int(static_cast<int64_t>(q.items.size()));
    out.push_back(q.items[static_cast<size_t>(idx)].second);
  }
  q.samples += count;
  return out;
}

int64_t TaskBuffer::samples(int d) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = queues_.find(d);
  return it == queues_.end() ? 0 : it->second.samples;
}

void TaskBuffer::set_samples(int d, int64_t count) {
  std::lock_guard<std::mutex> lock(mu_);
  queues_[d].samples = count;
}

std::map<int, std::vector<int64_t>> TaskBuffer::queue_counters() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::map<int, std::vector<int64_t>> out;
  for (const auto& [d, q] : queues_) {
    std::vector<int64_t> counters;
    for (const auto& [c, t] : q.items) counters.push_back(c);
    out[d] = std::move(counters);
  }
  return out;
}

std::map<int, int64_t> TaskBuffer::next_counters() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::map<int, int64_t> out;
  for (const auto& [d, q] : queues_) out[d] = q.next_counter;
  return out;
}

std::map<int, int64_t> TaskBuffer::sample_counts() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::map<int, int64_t> out;
  for (const auto& [d, q] : queues_) out[d] = q.samples;
  return out;
}

void TaskBuffer::stop() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
}

bool TaskBuffer::stopped() const {
  std::lock_guard<std::mutex> lock(mu_);
  return stop_;
}

}  // namespace cadet
