#include <vector>

#include "doctest.h"
#include "rumor/errors.hpp"
#include "rumor/rng.hpp"
#include "rumor/tape.hpp"
#include "rumor/tensor.hpp"

using namespace rumor;

TEST_CASE("tensor storage is row-major and sized by its shape") {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK(t[1 * 3 + 2] == 6.0);
  CHECK_FALSE(t.has_grad());
  CHECK(t.grad().size() == 6);
  CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(Tensor({0, 2}), DimensionError);
}

TEST_CASE("copies alias, clone does not") {
  Tensor a({2}, {1, 2});
  Tensor alias = a;
  Tensor copy = a.clone();
  alias[0] = 9;
  CHECK(a[0] == 9);
  CHECK(copy[0] == 1);
  CHECK(alias.same_storage(a));
  CHECK_FALSE(copy.same_storage(a));
}

TEST_CASE("seeded rng replays the same sequence") {
  SeededRng a(99), b(99), c(100);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
  // mt19937_64 is fully specified; the 10000th output of the default seed is fixed.
  std::mt19937_64 ref;
  ref.discard(9999);
  CHECK(ref() == 9981545732273789042ULL);
}

TEST_CASE("rng distributions stay in range") {
  SeededRng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-0.08, 0.08);
    CHECK(u >= -0.08);
    CHECK(u < 0.08);
    CHECK(rng.below(7) < 7);
  }
  std::vector<int> v{1, 2, 3, 4, 5};
  rng.shuffle(std::span<int>(v));
  std::sort(v.begin(), v.end());
  CHECK(v == std::vector<int>{1, 2, 3, 4, 5});
}

TEST_CASE("backward rejects a non-scalar loss") {
  Tape tape;
  Tensor v({2});
  CHECK_THROWS_AS(tape.backward(v), ContractError);
}
