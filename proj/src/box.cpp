// Copyright 2026 The pide-mc Authors
// SPDX-License-Identifier: Apache-2.0
#include "pidemc/box.hpp"

#include <algorithm>
#include <cmath>

#include "pidemc/error.hpp"

namespace pidemc {

Box::Box(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty() || lower_.size() != upper_.size()) {
    detail::throw_invalid("box: bounds must be non-empty and of equal length");
  }
  center_.resize(lower_.size());
  half_.resize(lower_.size());
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) ||
        !(lower_[i] < upper_[i])) {
      detail::throw_invalid("box: dimension " + std::to_string(i) +
                            " needs finite bounds with lower < upper");
    }
    center_[i] = 0.5 * (lower_[i] + upper_[i]);
    half_[i] = 0.5 * (upper_[i] - lower_[i]);
  }
}

Box Box::symmetric(std::size_t d, double half_width) {
  return Box(std::vector<double>(d, -half_width),
             std::vector<double>(d, half_width));
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lower_.size(); ++i) v *= upper_[i] - lower_[i];
  return v;
}

bool Box::contains(std::span<const double> x) const {
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < x[i] && x[i] < upper_[i])) return false;
  }
  return true;
}

void Box::clamp(std::span<double> x) const {
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    x[i] = std::clamp(x[i], lower_[i], upper_[i]);
  }
}

double Box::distance(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    double e = 0.0;
    if (x[i] < lower_[i]) e = lower_[i] - x[i];
    if (x[i] > upper_[i]) e = x[i] - upper_[i];
    s += e * e;
  }
  return std::sqrt(s);
}

}  // namespace pidemc
