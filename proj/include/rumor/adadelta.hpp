#pragma once

#include <vector>

#include "rumor/tensor.hpp"

namespace rumor {

struct AdadeltaState {
  std::vector<double> mean_sq_grad;    // E[g^2]
  std::vector<double> mean_sq_update;  // E[dx^2]
  double rho = 0.95;
  double eps = 1e-6;

  AdadeltaState() = default;
  AdadeltaState(const Tensor& param, double rho, double eps);
};

/// One Adadelta update of `param` from its accumulated gradient, which is
/// zeroed afterwards. A parameter without a gradient buffer is treated as
/// having a zero gradient.
void adadelta_step(Tensor& param, AdadeltaState& state);

/// Adadelta over a fixed list of parameters.
class Adadelta {
 public:
  Adadelta(std::vector<Tensor> params, double rho = 0.95, double eps = 1e-6);

  void step();
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<AdadeltaState> states_;
};

}  // namespace rumor
