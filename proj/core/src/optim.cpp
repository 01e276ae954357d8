#include "rankforge/optim.hpp"

#include <cmath>
#include <string>

#include "rankforge/error.hpp"

namespace rankforge {

void OptimizerConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidConfig("optimizer: " + what); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning rate must be positive");
  if (batch_docs == 0) fail("batch_docs must be positive");
  if (warmup_steps == 0) fail("warmup_steps must be positive");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) fail("weight decay must be non-negative");
  if (!(beta1 > 0.0 && beta1 < 1.0)) fail("beta1 must be in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) fail("beta2 must be in (0, 1)");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail("epsilon must be positive");
}

OptimizerState OptimizerState::init(const OptimizerConfig& config, std::size_t num_params) {
  config.validate();
  OptimizerState s;
  s.config = config;
  s.m.assign(num_params, 0.0);
  s.v.assign(num_params, 0.0);
  return s;
}

double lr_at(const OptimizerState& opt, std::size_t step) {
  const auto& c = opt.config;
  if (step < 1 || step > c.max_steps) {
    throw InvalidInput("lr_at: step " + std::to_string(step) + " outside [1, " +
                       std::to_string(c.max_steps) + "]");
  }
  if (step >= c.warmup_steps) return c.learning_rate;
  return c.learning_rate * static_cast<double>(step) / static_cast<double>(c.warmup_steps);
}

void adamw_update(OptimizerState& opt, std::vector<double>& params, std::span<const double> grad) {
  if (grad.size() != params.size() || opt.m.size() != params.size()) {
    throw InvalidInput("adamw: gradient has " + std::to_string(grad.size()) + " entries, parameters " +
                       std::to_string(params.size()));
  }
  const std::size_t t = opt.step + 1;
  for (double g : grad) {
    if (!std::isfinite(g)) throw DivergedRun(t, std::nan(""), "non-finite gradient");
  }
  const auto& c = opt.config;
  const double lr = lr_at(opt, t);
  const double td = static_cast<double>(t);
  const double bias1 = 1.0 - std::pow(c.beta1, td);
  const double bias2 = 1.0 - std::pow(c.beta2, td);
  for (std::size_t i = 0; i < params.size(); ++i) {
    opt.m[i] = c.beta1 * opt.m[i] + (1.0 - c.beta1) * grad[i];
    opt.v[i] = c.beta2 * opt.v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
    const double m_hat = opt.m[i] / bias1;
    const double v_hat = opt.v[i] / bias2;
    params[i] -= lr * (m_hat / (std::sqrt(v_hat) + c.epsilon) + c.weight_decay * params[i]);
  }
  opt.step = t;
}

}  // namespace rankforge
