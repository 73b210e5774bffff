#pragma once

#include <functional>
#include <vector>

#include "rumor/tensor.hpp"

namespace rumor {

/// Records the backward rules of one forward pass, in execution order.
/// A tape built with recording off (inference) ignores everything.
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}

  bool recording() const { return recording_; }
  std::size_t size() const { return ops_.size(); }

  void record(std::function<void()> backward_rule);

  /// Seeds d(loss)/d(loss) = 1 and replays the recorded rules in reverse.
  /// The tape is consumed: it is empty afterwards.
  void backward(Tensor& loss);

 private:
  bool recording_;
  std::vector<std::function<void()>> ops_;
};

}  // namespace rumor
