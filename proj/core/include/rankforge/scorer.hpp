#pragma once

// Feature-based stand-ins for cross-encoders: a scorer maps one
// query-passage feature vector to a scalar logit.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace rankforge {

using FeatureVector = std::vector<double>;

enum class ScorerKind { kLinear, kMlp1 };

std::string_view scorer_kind_name(ScorerKind kind) noexcept;
std::optional<ScorerKind> parse_scorer_kind(std::string_view name) noexcept;

/// Number of parameters: linear d + 1, mlp1 d*h + h + h + 1.
std::size_t parameter_count(ScorerKind kind, std::size_t input_dim, std::size_t hidden_width);

/// Flat parameter layout.
///   linear: [w_0 .. w_{d-1}, b]
///   mlp1:   [W1 (h rows of d, row-major), b1 (h), w2 (h), b2]
struct ScorerParams {
  ScorerKind kind = ScorerKind::kLinear;
  std::size_t input_dim = 0;
  std::size_t hidden_width = 0;  // 0 for linear
  std::vector<double> weights;

  /// Throws InvalidInput if the weight count does not match kind and dimensions.
  void validate() const;
  bool operator==(const ScorerParams&) const = default;
};

/// linear: w.x + b; mlp1: w2.tanh(W1 x + b1) + b2.
double score(const ScorerParams& params, std::span<const double> features);

std::vector<double> score_all(const ScorerParams& params, std::span<const FeatureVector> features);

/// dL/dtheta = sum_i upstream_i * ds_i/dtheta, in the ScorerParams::weights layout.
std::vector<double> backward(const ScorerParams& params, std::span<const FeatureVector> features,
                             std::span<const double> upstream);

/// Weights ~ Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases 0. Deterministic in seed.
ScorerParams init_params(ScorerKind kind, std::size_t input_dim, std::size_t hidden_width,
                         std::uint64_t seed);

}  // namespace rankforge
