#ifndef OULDP_PARALLEL_HPP
#define OULDP_PARALLEL_HPP

// Deterministic parallel reduction over path indices. Paths are grouped in
// fixed-size chunks, each chunk is accumulated serially in index order, and
// the chunk results are combined by pairwise summation. The result therefore
// depends only on the chunk size, never on the number of workers.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace ouldp {

/// Name of the environment variable holding the default worker count.
inline constexpr const char* kWorkersEnv = "OULDP_WORKERS";

/// Worker count from OULDP_WORKERS, else the hardware concurrency (>= 1).
inline unsigned default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      // fall through to the hardware default
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline constexpr std::uint64_t kDefaultChunk = 1024;

namespace detail {

template <class Acc>
Acc pairwise_merge(std::vector<Acc>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  Acc left = pairwise_merge(parts, lo, mid);
  left.merge(pairwise_merge(parts, mid, hi));
  return left;
}

}  // namespace detail

/// Runs visit(index, acc) for index in [0, n) and reduces. Acc must be
/// default-constructible and provide merge(const Acc&). Exceptions from
/// visit are rethrown (the one from the lowest chunk wins).
template <class Acc, class Visit>
Acc parallel_reduce(std::uint64_t n, unsigned workers, Visit&& visit,
                    std::uint64_t chunk = kDefaultChunk) {
  if (n == 0) return Acc{};
  const std::uint64_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<Acc> parts(static_cast<std::size_t>(n_chunks));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_chunks));
  std::atomic<std::uint64_t> next{0};

  const auto work = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      const std::uint64_t end = std::min(n, (c + 1) * chunk);
      try {
        Acc acc{};
        for (std::uint64_t i = c * chunk; i < end; ++i) visit(i, acc);
        parts[static_cast<std::size_t>(c)] = acc;
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    }
  };

  const unsigned used = static_cast<unsigned>(
      std::max<std::uint64_t>(1, std::min<std::uint64_t>(workers, n_chunks)));
  if (used == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(used);
    for (unsigned w = 0; w < used; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return detail::pairwise_merge(parts, 0, parts.size());
}

}  // namespace ouldp

#endif  // OULDP_PARALLEL_HPP
