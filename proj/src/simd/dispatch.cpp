// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>
#include <string>

#include "pidemc/error.hpp"
#include "pidemc/simd/kernels.hpp"

namespace pidemc::simd {

namespace {

constexpr Kernels kScalar{&scalar::philox, &scalar::normal_quantile, &scalar::sparse_eval};
constexpr Kernels kAvx2{&avx2::philox, &avx2::normal_quantile, &avx2::sparse_eval};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Level initial_level() {
  Level level = detected();
  if (const char* env = std::getenv("PIDEMC_SIMD")) {
    const std::string v(env);
    if (v == "scalar") level = Level::Scalar;
    // "avx2" only takes effect when supported.
    if (v == "avx2" && detected() == Level::Avx2) level = Level::Avx2;
  }
  return level;
}

std::atomic<int>& active_slot() {
  static std::atomic<int> slot{static_cast<int>(initial_level())};
  return slot;
}

}  // namespace

std::string_view name(Level level) {
  switch (level) {
    case Level::Scalar: return "scalar";
    case Level::Avx2: return "avx2";
  }
  return "unknown";
}

Level detected() {
  static const Level level =
      (avx2::compiled() && cpu_has_avx2()) ? Level::Avx2 : Level::Scalar;
  return level;
}

Level active() { return static_cast<Level>(active_slot().load(std::memory_order_relaxed)); }

void force(Level level) {
  if (level == Level::Avx2 && detected() != Level::Avx2) {
    throw InvalidArgument("AVX2 kernels are not available on this CPU/build");
  }
  active_slot().store(static_cast<int>(level), std::memory_order_relaxed);
}

const Kernels& kernels(Level level) {
  return level == Level::Avx2 ? kAvx2 : kScalar;
}

}  // namespace pidemc::simd
