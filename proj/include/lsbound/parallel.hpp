#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace lsbound {

int effective_threads(int requested = 0);

inline constexpr std::size_t kDefaultChunk = 65536;

// Deterministic chunked map-reduce: chunk c covers [c*chunk, min(n,(c+1)*chunk));
// per-chunk states are combined in chunk order, so the result is independent
// of the thread count.
template <typename State, typename ChunkFn, typename CombineFn>
State chunked_reduce(std::size_t n, ChunkFn&& fn, State init, CombineFn&& combine,
                     std::size_t chunk = kDefaultChunk, int threads = 0) {
  if (n == 0) return init;
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  const int t = effective_threads(threads);
  std::vector<State> states(n_chunks, init);
  std::vector<std::exception_ptr> errors(n_chunks);
  auto worker = [&](std::size_t first_chunk, std::size_t stride) {
    for (std::size_t c = first_chunk; c < n_chunks; c += stride) {
      const std::size_t begin = c * chunk;
      const std::size_t end = begin + chunk < n ? begin + chunk : n;
      try {
        states[c] = fn(c, begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  if (t <= 1 || n_chunks == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) pool.emplace_back(worker, static_cast<std::size_t>(i), static_cast<std::size_t>(t));
    for (auto& th : pool) th.join();
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
  State acc = std::move(states[0]);
  for (std::size_t c = 1; c < n_chunks; ++c) acc = combine(std::move(acc), std::move(states[c]));
  return acc;
}

// Parallel for over [0, n) in deterministic chunks; fn(begin, end) must only
// write to disjoint ranges (typically a preallocated output buffer).
template <typename Fn>
void chunked_for(std::size_t n, Fn&& fn, std::size_t chunk = kDefaultChunk, int threads = 0) {
  struct Empty {};
  chunked_reduce<Empty>(
      n,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        fn(begin, end);
        return Empty{};
      },
      Empty{}, [](Empty, Empty) { return Empty{}; }, chunk, threads);
}

}  // namespace lsbound
