#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace pcvx {

/// Worker count: set_thread_count() override, else PCVX_THREADS, else the
/// hardware concurrency.
int thread_count();
void set_thread_count(int threads);  // 0 restores the default

/// True on threads currently running a parallel_map body; nested calls then
/// run serially instead of multiplying threads.
inline thread_local bool inside_parallel_map = false;

/// Evaluates f(0..n-1) on worker threads. Results are stored by index, so the
/// output never depends on scheduling. The exception of the lowest failing
/// index is rethrown.
template <class F>
auto parallel_map(std::size_t n, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    const bool outer = inside_parallel_map;
    inside_parallel_map = true;
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    inside_parallel_map = outer;
  };
  const std::size_t threads =
      inside_parallel_map ? 1 : std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (std::thread& t : pool) t.join();
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// One step of a deterministic falsification search.
template <class T>
struct Probe {
  bool tested = false;
  std::optional<T> hit;
};

template <class T>
struct SearchOutcome {
  long enumerated = 0;
  long tested = 0;
  std::optional<T> hit;
};

/// Runs f(0), f(1), ... in parallel chunks and stops at the first chunk with
/// a hit. The reported hit is the lowest-index one, and the counts cover
/// exactly the indices up to it, whatever the thread count.
template <class T, class F>
SearchOutcome<T> first_hit(long total, F&& f, std::size_t chunk = 16) {
  SearchOutcome<T> out;
  for (long start = 0; start < total; start += static_cast<long>(chunk)) {
    const auto count = static_cast<std::size_t>(std::min<long>(static_cast<long>(chunk), total - start));
    std::vector<Probe<T>> probes = parallel_map(count, [&](std::size_t k) { return f(start + static_cast<long>(k)); });
    for (Probe<T>& p : probes) {
      out.enumerated += 1;
      if (p.tested) out.tested += 1;
      if (p.hit) {
        out.hit = std::move(p.hit);
        return out;
      }
    }
  }
  return out;
}

}  // namespace pcvx
