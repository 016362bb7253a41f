// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include "pidemc/rng.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pidemc/error.hpp"
#include "pidemc/specfun.hpp"

namespace pidemc {

StreamKey make_key(std::uint64_t step, std::uint64_t node, std::uint64_t path,
                   std::uint64_t seed) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint32_t>::max();
  if (step > kMax || node > kMax || path > kMax) {
    detail::throw_invalid("stream key index exceeds 32 bits (step=" +
                          std::to_string(step) + ", node=" + std::to_string(node) +
                          ", path=" + std::to_string(path) + ")");
  }
  return StreamKey{static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(node),
                   static_cast<std::uint32_t>(path), seed};
}

RandomStream::RandomStream(const StreamKey& key, std::uint64_t first_draw)
    : key_(key), philox_key_(philox::key_from_seed(key.master_seed)),
      position_(first_draw) {}

std::array<std::uint32_t, 2> RandomStream::next_words() {
  const std::uint64_t block = position_ >> 1;
  if (block != cached_block_) {
    if (block > std::numeric_limits<std::uint32_t>::max()) {
      throw NumericFailure("random stream exhausted");
    }
    cached_ = philox::philox4x32(
        {key_.step_index, key_.node_index, key_.path_index,
         static_cast<std::uint32_t>(block)},
        philox_key_);
    cached_block_ = block;
  }
  const std::size_t half = static_cast<std::size_t>(position_ & 1u) * 2;
  ++position_;
  return {cached_[half], cached_[half + 1]};
}

double RandomStream::uniform01() {
  const auto w = next_words();
  return to_unit_closed_open(w[0], w[1]);
}

double RandomStream::uniform_open() {
  const auto w = next_words();
  return to_unit_open(w[0], w[1]);
}

double RandomStream::standard_normal() {
  return specfun::normal_quantile(uniform_open());
}

std::vector<double> uniform01(const StreamKey& key, std::size_t n) {
  RandomStream stream(key);
  std::vector<double> out(n);
  for (auto& u : out) u = stream.uniform01();
  return out;
}

std::vector<double> standard_normal(const StreamKey& key, std::size_t d) {
  if (d == 0) detail::throw_invalid("standard_normal: d must be >= 1");
  RandomStream stream(key);
  std::vector<double> out(d);
  for (auto& z : out) z = stream.standard_normal();
  return out;
}

std::uint32_t poisson_from_uniform(double mean, double u) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    detail::throw_invalid("poisson_count: mean must be finite and >= 0");
  }
  if (mean == 0.0) return 0;
  double p = std::exp(-mean);
  if (p == 0.0) {
    // exp(-mean) underflows; fall back to a normal approximation.
    const double z = specfun::normal_quantile(std::max(u, 0x1.0p-53));
    return static_cast<std::uint32_t>(std::max(0.0, std::floor(mean + std::sqrt(mean) * z + 0.5)));
  }
  double cdf = p;
  std::uint32_t k = 0;
  while (u >= cdf && k < 1'000'000u) {
    ++k;
    p *= mean / k;
    const double next = cdf + p;
    if (next == cdf) break;
    cdf = next;
  }
  return k;
}

std::uint32_t poisson_count(const StreamKey& key, double mean) {
  RandomStream stream(key);
  return poisson_from_uniform(mean, stream.uniform01());
}

}  // namespace pidemc
