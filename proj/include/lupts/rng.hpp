#pragma once

#include <cstdint>
#include <random>

#include "lupts/types.hpp"

namespace lupts {

/// Seedable random stream addressed by (master_seed, stream_index).
///
/// Distinct stream indices give statistically independent streams, so
/// replicates can be assigned their own stream and run in any order (or in
/// parallel) without changing results. The raw 64-bit output sequence is
/// fully determined by the standard-specified mt19937_64, keyed through a
/// splitmix64 mix of the pair; it is identical on every platform. Gaussian
/// variates use an explicit Box-Muller transform rather than
/// std::normal_distribution, whose algorithm the standard leaves
/// implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53-bit resolution.
  double next_uniform();

  /// Standard normal variate.
  double next_normal();

  /// rows x cols matrix of standard normals, filled in row-major order.
  Matrix normal_matrix(Index rows, Index cols);

  /// Length-n vector of standard normals.
  Vector normal_vector(Index n);

  /// Deterministic in-place Fisher-Yates shuffle of [0, n) indices.
  std::vector<Index> shuffled_indices(Index n);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace lupts
