#include "rankforge/scorer.hpp"

#include <cmath>
#include <random>
#include <string>

#include "rankforge/error.hpp"

namespace rankforge {
namespace {

void check_dim(const ScorerParams& params, std::span<const double> features) {
  if (features.size() != params.input_dim) {
    throw InvalidInput("feature dimension " + std::to_string(features.size()) +
                       " does not match scorer input dimension " + std::to_string(params.input_dim));
  }
  if (params.weights.size() != parameter_count(params.kind, params.input_dim, params.hidden_width)) params.validate();
}

}  // namespace

std::string_view scorer_kind_name(ScorerKind kind) noexcept {
  return kind == ScorerKind::kLinear ? "linear" : "mlp1";
}

std::optional<ScorerKind> parse_scorer_kind(std::string_view name) noexcept {
  if (name == "linear") return ScorerKind::kLinear;
  if (name == "mlp1") return ScorerKind::kMlp1;
  return std::nullopt;
}

std::size_t parameter_count(ScorerKind kind, std::size_t input_dim, std::size_t hidden_width) {
  if (kind == ScorerKind::kLinear) return input_dim + 1;
  return input_dim * hidden_width + 2 * hidden_width + 1;
}

void ScorerParams::validate() const {
  if (input_dim == 0) throw InvalidInput("scorer input dimension must be at least 1");
  if (kind == ScorerKind::kMlp1 && hidden_width == 0) {
    throw InvalidInput("mlp1 scorer needs a hidden width of at least 1");
  }
  if (kind == ScorerKind::kLinear && hidden_width != 0) {
    throw InvalidInput("linear scorer must have hidden width 0");
  }
  const std::size_t expected = parameter_count(kind, input_dim, hidden_width);
  if (weights.size() != expected) {
    throw InvalidInput(std::string(scorer_kind_name(kind)) + " scorer with d=" +
                       std::to_string(input_dim) + ", h=" + std::to_string(hidden_width) +
                       " needs " + std::to_string(expected) + " weights, got " +
                       std::to_string(weights.size()));
  }
}

double score(const ScorerParams& params, std::span<const double> x) {
  check_dim(params, x);
  const std::size_t d = params.input_dim;
  const double* w = params.weights.data();

  if (params.kind == ScorerKind::kLinear) {
    double s = w[d];
    for (std::size_t k = 0; k < d; ++k) s += w[k] * x[k];
    return s;
  }

  const std::size_t h = params.hidden_width;
  const double* b1 = w + d * h;
  const double* w2 = b1 + h;
  double s = w2[h];  // b2
  for (std::size_t j = 0; j < h; ++j) {
    double pre = b1[j];
    const double* row = w + j * d;
    for (std::size_t k = 0; k < d; ++k) pre += row[k] * x[k];
    s += w2[j] * std::tanh(pre);
  }
  return s;
}

std::vector<double> score_all(const ScorerParams& params, std::span<const FeatureVector> features) {
  std::vector<double> out;
  out.reserve(features.size());
  for (const auto& x : features) out.push_back(score(params, x));
  return out;
}

std::vector<double> backward(const ScorerParams& params, std::span<const FeatureVector> features,
                             std::span<const double> upstream) {
  if (features.size() != upstream.size()) {
    throw InvalidInput("backward: " + std::to_string(features.size()) + " feature vectors but " +
                       std::to_string(upstream.size()) + " upstream gradients");
  }
  const std::size_t d = params.input_dim;
  std::vector<double> grad(params.weights.size(), 0.0);

  if (params.kind == ScorerKind::kLinear) {
    for (std::size_t i = 0; i < features.size(); ++i) {
      check_dim(params, features[i]);
      const double g = upstream[i];
      if (g == 0.0) continue;
      for (std::size_t k = 0; k < d; ++k) grad[k] += g * features[i][k];
      grad[d] += g;
    }
    return grad;
  }

  const std::size_t h = params.hidden_width;
  const double* w = params.weights.data();
  const double* b1 = w + d * h;
  const double* w2 = b1 + h;
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + d * h;
  double* g_w2 = g_b1 + h;
  double& g_b2 = g_w2[h];

  std::vector<double> hidden(h);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& x = features[i];
    check_dim(params, x);
    const double g = upstream[i];
    if (g == 0.0) continue;
    for (std::size_t j = 0; j < h; ++j) {
      double pre = b1[j];
      const double* row = w + j * d;
      for (std::size_t k = 0; k < d; ++k) pre += row[k] * x[k];
      hidden[j] = std::tanh(pre);
    }
    g_b2 += g;
    for (std::size_t j = 0; j < h; ++j) {
      g_w2[j] += g * hidden[j];
      const double g_pre = g * w2[j] * (1.0 - hidden[j] * hidden[j]);
      g_b1[j] += g_pre;
      double* g_row = g_w1 + j * d;
      for (std::size_t k = 0; k < d; ++k) g_row[k] += g_pre * x[k];
    }
  }
  return grad;
}

ScorerParams init_params(ScorerKind kind, std::size_t input_dim, std::size_t hidden_width,
                         std::uint64_t seed) {
  ScorerParams p;
  p.kind = kind;
  p.input_dim = input_dim;
  p.hidden_width = kind == ScorerKind::kLinear ? 0 : hidden_width;
  p.weights.assign(parameter_count(kind, input_dim, p.hidden_width), 0.0);
  p.validate();

  std::mt19937_64 rng(seed);
  auto fill = [&rng](double* first, std::size_t count, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = 0; i < count; ++i) first[i] = u(rng);
  };

  const std::size_t d = input_dim;
  if (kind == ScorerKind::kLinear) {
    fill(p.weights.data(), d, d);
  } else {
    const std::size_t h = p.hidden_width;
    fill(p.weights.data(), d * h, d);             // W1
    fill(p.weights.data() + d * h + h, h, h);     // w2
  }
  return p;
}

}  // namespace rankforge
