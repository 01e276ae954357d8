#pragma once

// Finite-difference gradient checking for the loss functions.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rankforge/core.hpp"
#include "rankforge/losses.hpp"

namespace rankforge {

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
std::vector<double> central_difference(const ScalarFunction& f, std::span<const double> x,
                                       double h = 1e-5);

/// max_i |a_i - b_i| / max(max_i |a_i|, max_i |b_i|, tiny). Zero when both are zero.
double max_relative_error(std::span<const double> analytic, std::span<const double> numeric);

struct GradcheckOptions {
  std::size_t list_size = 8;  // n >= 2 (>= 1 for adr_mse); pair objectives always score 2
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  double score_stddev = 3.0;
  double step = 1e-5;
  LossConfig loss;
  /// Negative control: perturbs the analytic gradient so the check must fail.
  bool break_gradient = false;
};

struct GradcheckResult {
  double max_relative_error = 0.0;
  std::size_t trials = 0;
};

/// Random inputs are drawn from Normal(0, score_stddev); hinge inputs are kept
/// at least 1e-2 away from the kink.
GradcheckResult check_objective(Objective objective, const GradcheckOptions& options);

}  // namespace rankforge
