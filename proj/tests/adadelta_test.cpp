#include <cmath>

#include "doctest.h"
#include "rumor/adadelta.hpp"
#include "rumor/errors.hpp"
#include "rumor/ops.hpp"
#include "support/numeric.hpp"

using namespace rumor;

TEST_CASE("adadelta first step from fresh state") {
  Tensor x = Tensor::scalar(0.0);
  x.grad()[0] = 1.0;
  AdadeltaState state(x, 0.95, 1e-6);
  adadelta_step(x, state);
  // delta = -sqrt(0 + 1e-6) / sqrt(0.05 + 1e-6) * 1
  CHECK(x[0] == doctest::Approx(-0.004472).epsilon(1e-4));
  CHECK(x[0] == doctest::Approx(-std::sqrt(1e-6) / std::sqrt(0.05 + 1e-6)).epsilon(1e-14));
  CHECK(x.grad()[0] == 0.0);
  CHECK(state.mean_sq_grad[0] == doctest::Approx(0.05));
  CHECK(state.mean_sq_update[0] == doctest::Approx(0.05 * x[0] * x[0]));
}

TEST_CASE("zero gradient leaves the parameter and decays accumulators") {
  Tensor x({3}, {1, -2, 3});
  AdadeltaState state(x, 0.95, 1e-6);
  state.mean_sq_grad = {0.4, 0.2, 0.1};
  state.mean_sq_update = {0.04, 0.02, 0.01};
  adadelta_step(x, state);
  CHECK(std::vector<double>(x.data().begin(), x.data().end()) == std::vector<double>{1, -2, 3});
  CHECK(state.mean_sq_grad[0] == doctest::Approx(0.38));
  CHECK(state.mean_sq_update[2] == doctest::Approx(0.0095));
}

TEST_CASE("adadelta rejects mismatched state") {
  Tensor x({3});
  AdadeltaState state(Tensor({2}), 0.95, 1e-6);
  CHECK_THROWS_AS(adadelta_step(x, state), DimensionError);
  CHECK_THROWS_AS(AdadeltaState(x, 1.0, 1e-6), ConfigError);
}

TEST_CASE("adadelta runs are bitwise reproducible and descend") {
  auto run = [](std::uint64_t seed) {
    SeededRng rng(seed);
    Tensor w = testing_support::random_tensor({4, 3}, rng);
    Tensor x = testing_support::random_tensor({3}, rng);
    w.set_requires_grad(true);
    Adadelta opt({w});
    std::vector<double> losses;
    for (int step = 0; step < 10; ++step) {
      Tape tape;
      auto y = matvec(tape, w, x);
      auto loss = dot(tape, y, y);
      losses.push_back(loss.item());
      tape.backward(loss);
      opt.step();
    }
    return std::make_pair(std::vector<double>(w.data().begin(), w.data().end()), losses);
  };
  auto [a, la] = run(17);
  auto [b, lb] = run(17);
  CHECK(a == b);
  CHECK(la.back() < la.front());
}
