#pragma once

#include <functional>
#include <span>
#include <string>

#include "fedctr/nn/params.hpp"

namespace fedctr::nn {

struct GradCheckOptions {
  double epsilon = 1e-5;
  /// 0 checks every coordinate; otherwise a seeded sample per block.
  std::size_t max_coords_per_block = 0;
  std::uint64_t sample_seed = 7;
  /// Relative error denominator floor: |a-n| / max(|a|, |n|, floor).
  double denom_floor = 1e-3;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_block;
  std::size_t worst_index = 0;
  std::size_t coords_checked = 0;
};

/// Central-difference check of analytic gradients.
///
/// `fn(with_grad)` must evaluate a scalar forward pass over the current
/// parameter values and, when `with_grad` is true, also accumulate analytic
/// gradients into the blocks. The computation must be deterministic (dropout
/// disabled or mask frozen); a non-deterministic fn is rejected.
GradCheckResult grad_check(const std::function<double(bool)>& fn,
                           std::span<LayerParams* const> params,
                           const GradCheckOptions& opts = {});

}  // namespace fedctr::nn
