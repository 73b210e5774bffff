#include "rumor/tape.hpp"

#include "rumor/errors.hpp"

namespace rumor {

void Tape::record(std::function<void()> backward_rule) {
  if (recording_) ops_.push_back(std::move(backward_rule));
}

void Tape::backward(Tensor& loss) {
  if (loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + shape_to_string(loss.shape()));
  }
  loss.grad()[0] = 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
  ops_.clear();
}

}  // namespace rumor
