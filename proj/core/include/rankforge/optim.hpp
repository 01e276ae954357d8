#pragma once

// AdamW with decoupled weight decay and a linear-warmup, constant-plateau
// learning-rate schedule.

#include <cstddef>
#include <span>
#include <vector>

namespace rankforge {

struct OptimizerConfig {
  double learning_rate = 1e-5;
  std::size_t batch_docs = 32;  // documents per batch, summed over queries
  std::size_t warmup_steps = 5000;
  std::size_t max_steps = 200000;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Throws InvalidConfig for out-of-domain values.
  void validate() const;
  bool operator==(const OptimizerConfig&) const = default;
};

struct OptimizerState {
  OptimizerConfig config;
  std::size_t step = 0;  // number of updates applied so far
  std::vector<double> m;
  std::vector<double> v;

  static OptimizerState init(const OptimizerConfig& config, std::size_t num_params);
};

/// eta * step / warmup while step <= warmup, eta afterwards. Requires 1 <= step <= max_steps.
double lr_at(const OptimizerState& opt, std::size_t step);

/// One AdamW update of `params` in place. Throws DivergedRun for a non-finite
/// gradient and InvalidInput for a length mismatch or an exhausted step budget.
void adamw_update(OptimizerState& opt, std::vector<double>& params, std::span<const double> grad);

}  // namespace rankforge
