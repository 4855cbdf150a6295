#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace synthweaver {

// Child seed for a named sub-stream, e.g. derive_seed(run_seed, "site:shop").
// Stable across platforms and releases.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label);

// Seeded generator with a bounded draw that does not depend on the standard
// library's distribution implementation, so a seed reproduces the same
// choices with any toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// k items drawn uniformly without replacement (partial Fisher-Yates), in
// draw order. Returns everything, shuffled, when k >= items.size().
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> items, std::size_t k, Rng& rng) {
  const std::size_t n = items.size();
  if (k > n) k = n;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(items[i], items[j]);
  }
  items.resize(k);
  return items;
}

}  // namespace synthweaver
