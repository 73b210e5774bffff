#include "rumor/adadelta.hpp"

#include <cmath>

#include "rumor/errors.hpp"

namespace rumor {

AdadeltaState::AdadeltaState(const Tensor& param, double rho_, double eps_)
    : mean_sq_grad(param.size(), 0.0), mean_sq_update(param.size(), 0.0), rho(rho_), eps(eps_) {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("adadelta rho must be in (0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adadelta eps must be positive");
}

void adadelta_step(Tensor& param, AdadeltaState& state) {
  const std::size_t n = param.size();
  if (state.mean_sq_grad.size() != n || state.mean_sq_update.size() != n) {
    throw DimensionError("adadelta_step: state holds " + std::to_string(state.mean_sq_grad.size()) +
                         " entries for parameter " + shape_to_string(param.shape()));
  }
  const double rho = state.rho, eps = state.eps;
  auto x = param.data();
  std::span<double> g;
  if (param.has_grad()) g = param.grad();
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = g.empty() ? 0.0 : g[i];
    double& eg2 = state.mean_sq_grad[i];
    double& edx2 = state.mean_sq_update[i];
    eg2 = rho * eg2 + (1.0 - rho) * gi * gi;
    const double delta = -std::sqrt(edx2 + eps) / std::sqrt(eg2 + eps) * gi;
    edx2 = rho * edx2 + (1.0 - rho) * delta * delta;
    x[i] += delta;
  }
  param.zero_grad();
}

Adadelta::Adadelta(std::vector<Tensor> params, double rho, double eps) : params_(std::move(params)) {
  states_.reserve(params_.size());
  for (const auto& p : params_) states_.emplace_back(p, rho, eps);
}

void Adadelta::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) adadelta_step(params_[i], states_[i]);
}

}  // namespace rumor
