// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random streams keyed by (step, node, path, master seed).
//
// Draw n of a stream is word pair (n % 2) of Philox4x32-10 block n / 2,
// evaluated at counter (step, node, path, n / 2) under the 64-bit master
// seed. Nothing is stateful beyond the position within one stream, so any
// worker can reproduce any draw of any stream.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace pidemc {

struct StreamKey {
  std::uint32_t step_index = 0;
  std::uint32_t node_index = 0;
  std::uint32_t path_index = 0;
  std::uint64_t master_seed = 0;

  bool operator==(const StreamKey&) const = default;
};

/// Checked conversion of solver indices to key fields.
StreamKey make_key(std::uint64_t step, std::uint64_t node, std::uint64_t path,
                   std::uint64_t seed);

namespace philox {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
inline constexpr int kRounds = 10;

constexpr Block philox4x32(Block ctr, Key key) {
  for (int r = 0; r < kRounds; ++r) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

constexpr Key key_from_seed(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

}  // namespace philox

/// 53-bit uniform in [0, 1) from two 32-bit words.
constexpr double to_unit_closed_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

/// Uniform in the open interval (0, 1): top 52 bits plus half a step, so
/// both ends stay representable. Feeds the inverse normal CDF.
constexpr double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

/// Sequential view of one keyed stream. Cheap to copy; confine each
/// instance to a single worker.
class RandomStream {
 public:
  explicit RandomStream(const StreamKey& key, std::uint64_t first_draw = 0);

  const StreamKey& key() const { return key_; }
  std::uint64_t position() const { return position_; }

  /// Raw (hi, lo) word pair for the next draw.
  std::array<std::uint32_t, 2> next_words();

  /// Next draw as a uniform in [0, 1).
  double uniform01();

  /// Next draw as a uniform in (0, 1).
  double uniform_open();

  /// Next draw mapped through the inverse normal CDF.
  double standard_normal();

 private:
  StreamKey key_;
  philox::Key philox_key_;
  std::uint64_t position_;
  philox::Block cached_{};
  std::uint64_t cached_block_ = ~std::uint64_t{0};
};

/// First n draws of the stream for `key`, as uniforms in [0, 1).
std::vector<double> uniform01(const StreamKey& key, std::size_t n);

/// d i.i.d. standard normals: the first d draws of the stream for `key`,
/// transformed by the inverse normal CDF. Throws InvalidArgument for d = 0.
std::vector<double> standard_normal(const StreamKey& key, std::size_t d);

/// Poisson variate with the given mean by sequential inverse transform of a
/// single uniform. Throws InvalidArgument for negative or non-finite mean.
std::uint32_t poisson_from_uniform(double mean, double u);

/// Poisson count from the first draw of the stream for `key`.
std::uint32_t poisson_count(const StreamKey& key, double mean);

}  // namespace pidemc
