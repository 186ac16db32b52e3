#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace embkit {

/**
 * Deterministic PRNG (xoshiro256++ seeded through splitmix64).
 *
 * Everything random in the toolkit flows through this class so that runs
 * are bit-reproducible across platforms and thread counts. The standard
 * library distributions are implementation-defined, so uniform/gaussian
 * draws are implemented here directly.
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double next_double();

  // Uniform index in [0, n). n must be > 0. Rejection sampling, no modulo bias.
  std::size_t next_index(std::size_t n);

  // Standard normal via Box-Muller; the spare value is cached.
  double next_gaussian();

  // Fisher-Yates using this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::uint64_t state_[4];
  double spare_gaussian_ = 0.0;
  bool has_spare_ = false;
};

// Derives an independent stream seed from a root seed and a stage name
// (optionally an index), so every pipeline stage gets its own stream.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stage);
std::uint64_t derive_seed(std::uint64_t root, std::string_view stage,
                          std::uint64_t index);

/**
 * Walker alias table for O(1) draws from a fixed discrete distribution.
 * Construction is deterministic given the weight vector.
 */
class AliasTable {
public:
  explicit AliasTable(const std::vector<double>& weights);

  std::size_t sample(Rng& rng) const;
  std::size_t size() const { return prob_.size(); }

private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

} // namespace embkit
