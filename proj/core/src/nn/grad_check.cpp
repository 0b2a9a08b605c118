#include "fedctr/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fedctr/nn/rng.hpp"

namespace fedctr::nn {

GradCheckResult grad_check(const std::function<double(bool)>& fn,
                           std::span<LayerParams* const> params,
                           const GradCheckOptions& opts) {
  if (opts.epsilon <= 0.0) throw std::invalid_argument("grad_check: epsilon must be > 0");

  const double f0 = fn(false);
  if (fn(false) != f0) {
    throw std::invalid_argument("grad_check: fn is not deterministic");
  }
  if (!std::isfinite(f0)) throw std::invalid_argument("grad_check: fn is non-finite");

  for (LayerParams* p : params) p->zero_grads();
  fn(true);

  Rng sampler(opts.sample_seed);
  GradCheckResult res;
  for (LayerParams* p : params) {
    for (ParamBlock& b : p->blocks()) {
      if (!b.trainable) continue;
      std::vector<std::size_t> coords(b.value.size());
      std::iota(coords.begin(), coords.end(), 0);
      if (opts.max_coords_per_block > 0 && coords.size() > opts.max_coords_per_block) {
        for (std::size_t i = 0; i < opts.max_coords_per_block; ++i) {
          std::swap(coords[i], coords[i + sampler.index(coords.size() - i)]);
        }
        coords.resize(opts.max_coords_per_block);
      }
      for (std::size_t c : coords) {
        double& theta = b.value.data()[c];
        const double saved = theta;
        theta = saved + opts.epsilon;
        const double fp = fn(false);
        theta = saved - opts.epsilon;
        const double fm = fn(false);
        theta = saved;
        const double numeric = (fp - fm) / (2.0 * opts.epsilon);
        const double analytic = b.grad.data()[c];
        const double denom = std::max({std::abs(analytic), std::abs(numeric), opts.denom_floor});
        const double rel = std::abs(analytic - numeric) / denom;
        ++res.coords_checked;
        if (rel > res.max_rel_error) {
          res.max_rel_error = rel;
          res.worst_block = p->name() + "." + b.name;
          res.worst_index = c;
        }
      }
    }
  }
  for (LayerParams* p : params) p->zero_grads();
  return res;
}

}  // namespace fedctr::nn
