#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace retag {

// Error categories used across the pipeline. Everything derives from
// std::runtime_error so callers can catch coarsely at the CLI boundary.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TransportError : std::runtime_error {
  explicit TransportError(const std::string& what, int attempts = 0)
      : std::runtime_error(what), attempts(attempts) {}
  int attempts;
};
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};
struct StoreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// FNV-1a 64-bit. Used for corpus/config/content hashes; change detection
// only, not cryptographic.
inline uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ull) {
  uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string to_hex(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline std::string fnv1a64_hex(std::string_view data) { return to_hex(fnv1a64(data)); }

// Runs fn(i) for i in [0, n) on up to max_workers threads. Results must be
// written to pre-sized slots keyed by i so the output is schedule-independent.
inline void parallel_for(size_t n, int max_workers, const std::function<void(size_t)>& fn) {
  if (n == 0) return;
  size_t workers = static_cast<size_t>(max_workers < 1 ? 1 : max_workers);
  if (workers > n) workers = n;
  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mu;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace retag
