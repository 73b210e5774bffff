#include <cmath>

#include "doctest.h"
#include "rumor/encoder.hpp"
#include "rumor/errors.hpp"
#include "support/numeric.hpp"

using namespace rumor;
using testing_support::gradient_check;
using testing_support::random_tensor;

namespace {

EncoderParams small_params(std::uint64_t seed, std::size_t vocab = 12, std::size_t dw = 4, std::size_t h = 3) {
  SeededRng rng(seed);
  return EncoderParams::init(vocab, dw, h, rng);
}

void zero(Tensor& t) { std::fill(t.data().begin(), t.data().end(), 0.0); }

Interval make_interval(std::vector<std::size_t> words, std::size_t p, std::vector<std::string> authors,
                       std::size_t q) {
  Interval iv;
  iv.word_indices = std::move(words);
  iv.word_mask.assign(iv.word_indices.size(), 1);
  iv.word_indices.resize(p, 0);
  iv.word_mask.resize(p, 0);
  iv.tweet_count = authors.size();
  iv.tweet_user_ids = std::move(authors);
  iv.tweet_user_ids.resize(q, kNullAuthor);
  return iv;
}

}  // namespace

TEST_CASE("embed_words") {
  auto params = small_params(1);
  Tape tape;
  SUBCASE("all PAD gives zeros") {
    std::vector<std::size_t> pad(5, 0);
    auto x = embed_words(tape, pad, params.word_table);
    CHECK(x.shape() == Shape{5, 4});
    for (double v : x.data()) CHECK(v == 0.0);
  }
  SUBCASE("repeated index shares one accumulator") {
    std::vector<std::size_t> idx{2, 2};
    auto x = embed_words(tape, idx, params.word_table);
    for (std::size_t d = 0; d < 4; ++d) CHECK(x[d] == x[4 + d]);
    auto loss = sum(tape, x);
    tape.backward(loss);
    for (std::size_t d = 0; d < 4; ++d) CHECK(params.word_table.grad()[2 * 4 + d] == 2.0);
  }
  SUBCASE("single word gradient lands on its row only") {
    std::vector<std::size_t> idx{7, 0, 0};
    auto loss = sum(tape, embed_words(tape, idx, params.word_table));
    tape.backward(loss);
    auto g = params.word_table.grad();
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == (i / 4 == 7 ? 1.0 : 0.0));
  }
  SUBCASE("out of range index") {
    std::vector<std::size_t> idx{12};
    CHECK_THROWS_AS(embed_words(tape, idx, params.word_table), DimensionError);
  }
}

TEST_CASE("bilstm_encode") {
  SUBCASE("zero weights give zero states") {
    auto params = small_params(2);
    for (Tensor* t : {&params.forward.input_weights, &params.forward.recurrent_weights, &params.forward.bias,
                      &params.backward.input_weights, &params.backward.recurrent_weights, &params.backward.bias})
      zero(*t);
    SeededRng rng(3);
    Tape tape;
    auto h = bilstm_encode(tape, random_tensor({5, 4}, rng), params);
    CHECK(h.shape() == Shape{5, 6});
    for (double v : h.data()) CHECK(v == 0.0);
  }
  SUBCASE("scalar step") {
    auto params = small_params(2, 4, 1, 1);
    for (auto* lstm : {&params.forward, &params.backward}) {
      std::fill(lstm->input_weights.data().begin(), lstm->input_weights.data().end(), 1.0);
      std::fill(lstm->recurrent_weights.data().begin(), lstm->recurrent_weights.data().end(), 1.0);
      zero(lstm->bias);
    }
    Tape tape;
    auto h = bilstm_encode(tape, Tensor({1, 1}, {1.0}), params);
    const double s = 1.0 / (1.0 + std::exp(-1.0));
    const double expected = s * std::tanh(s * std::tanh(1.0));
    CHECK(h[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(h[0] == doctest::Approx(0.369606).epsilon(1e-5));
    CHECK(h[1] == h[0]);
  }
  SUBCASE("gradients on a 4-step sequence") {
    auto params = small_params(4);
    SeededRng rng(5);
    Tensor x = random_tensor({4, 4}, rng);
    std::vector<Tensor> inputs{x,
                               params.forward.input_weights,
                               params.forward.recurrent_weights,
                               params.forward.bias,
                               params.backward.input_weights,
                               params.backward.recurrent_weights,
                               params.backward.bias};
    CHECK(gradient_check(inputs, [&](Tape& t) { return bilstm_encode(t, x, params); }) < 1e-4);
  }
}

TEST_CASE("word_attention") {
  auto params = small_params(6, 12, 4, 1);  // 2H = 2
  Tape tape;
  SUBCASE("single word") {
    Tensor h({1, 2}, {0.3, -0.7});
    auto [alpha, vec] = word_attention(tape, h, Mask{1}, params);
    CHECK(alpha[0] == 1.0);
    CHECK(vec[0] == 0.3);
    CHECK(vec[1] == -0.7);
  }
  SUBCASE("identical rows give uniform weights") {
    Tensor h({4, 2}, {0.5, 0.1, 0.5, 0.1, 0.5, 0.1, 0.5, 0.1});
    auto [alpha, vec] = word_attention(tape, h, Mask{1, 1, 1, 0}, params);
    for (int i = 0; i < 3; ++i) CHECK(alpha[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(alpha[3] == 0.0);
  }
  SUBCASE("logits ln 3 and 0") {
    params.attn_weights = Tensor({2, 2}, {1, 0, 0, 1});
    params.attn_bias = Tensor({2});
    params.context = Tensor({2}, {std::log(3.0) / std::tanh(1.0), 0.0});
    Tensor h({2, 2}, {1, 0, 0, 1});
    auto [alpha, vec] = word_attention(tape, h, Mask{1, 1}, params);
    CHECK(alpha[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(vec[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(vec[1] == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("all-false mask") {
    Tensor h({2, 2}, {1, 2, 3, 4});
    auto [alpha, vec] = word_attention(tape, h, Mask{0, 0}, params);
    for (double v : alpha.data()) CHECK(v == 0.0);
    for (double v : vec.data()) CHECK(v == 0.0);
  }
}

TEST_CASE("attention invariants on random encoder inputs") {
  SeededRng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    auto params = small_params(100 + trial, 12, 3, 2);
    const std::size_t p = 1 + rng.below(8);
    Tensor h = random_tensor({p, 4}, rng, -2.0, 2.0);
    Mask mask(p, 0);
    const std::size_t real = 1 + rng.below(p);
    for (std::size_t i = 0; i < real; ++i) mask[i] = 1;
    Tape tape(false);
    auto [alpha, vec] = word_attention(tape, h, mask, params);
    double total = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      CHECK(alpha[i] >= 0.0);
      CHECK(alpha[i] <= 1.0);
      if (!mask[i]) CHECK(alpha[i] == 0.0);
      total += alpha[i];
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);
    for (std::size_t d = 0; d < 4; ++d) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t i = 0; i < real; ++i) {
        lo = std::min(lo, h[i * 4 + d]);
        hi = std::max(hi, h[i * 4 + d]);
      }
      CHECK(vec[d] >= lo - 1e-12);
      CHECK(vec[d] <= hi + 1e-12);
    }
  }
}

TEST_CASE("build_interval_matrix") {
  SeededRng rng(8);
  std::vector<std::string> names{"a", "b"};
  auto users = UserTable::init(names, 2, rng);
  Tensor ik({2}, {0.5, -0.25});
  Tape tape;
  SUBCASE("two real tweets, q = 3") {
    auto iv = make_interval({3}, 4, {"a", "b"}, 3);
    auto m = build_interval_matrix(tape, ik, iv, 3, users);
    CHECK(m.shape() == Shape{3, 4});
    const std::vector<double> expected{0.5, -0.25, users.lookup("a")[0], users.lookup("a")[1],
                                       0.5, -0.25, users.lookup("b")[0], users.lookup("b")[1],
                                       0,   0,     0,                    0};
    CHECK(std::vector<double>(m.data().begin(), m.data().end()) == expected);
  }
  SUBCASE("zero interval vector") {
    auto iv = make_interval({}, 4, {"a"}, 3);
    auto m = build_interval_matrix(tape, Tensor({2}), iv, 3, users);
    CHECK(m[0] == 0.0);
    CHECK(m[1] == 0.0);
    CHECK(m[2] == users.lookup("a")[0]);
  }
  SUBCASE("one author on every row shares a gradient row") {
    auto iv = make_interval({3}, 4, {"a", "a", "a"}, 3);
    auto loss = sum(tape, build_interval_matrix(tape, ik, iv, 3, users));
    tape.backward(loss);
    CHECK(users.matrix().grad()[2] == 3.0);
    CHECK(users.matrix().grad()[4] == 0.0);
  }
  SUBCASE("unknown author and no_user_context") {
    auto iv = make_interval({3}, 4, {"zed"}, 3);
    auto m = build_interval_matrix(tape, ik, iv, 3, users);
    CHECK(m[2] == 0.0);
    auto iv2 = make_interval({3}, 4, {"a"}, 3);
    auto blank = build_interval_matrix(tape, ik, iv2, 3, users, true);
    CHECK(blank[2] == 0.0);
    CHECK(blank[0] == 0.5);
  }
  SUBCASE("width mismatch") {
    auto iv = make_interval({3}, 4, {"a"}, 3);
    CHECK_THROWS_AS(build_interval_matrix(tape, Tensor({3}), iv, 3, users), ConfigError);
  }
}

TEST_CASE("build_event_cube") {
  auto params = small_params(9, 12, 4, 2);  // 2H = 4 = D
  SeededRng rng(10);
  std::vector<std::string> names{"a", "b", "c"};
  auto users = UserTable::init(names, 4, rng);

  Event e{"e", Label::kRumor, {}};
  for (int t = 0; t < 6; ++t)
    e.tweets.push_back({std::to_string(t), t, names[t % 3], "", {static_cast<std::size_t>(2 + t), 3}});
  auto iv = split_into_intervals(e, 3, 5);

  Tape tape;
  SeededRng drop(1);
  auto cube = build_event_cube(tape, iv, params, users, {}, drop);
  CHECK(cube.shape() == Shape{3, 3, 8});

  SUBCASE("empty intervals give a zero cube") {
    Event empty{"x", Label::kRumor, {{"1", 0, "a", "", {}}}};
    auto ev = split_into_intervals(empty, 3, 5);
    ev.intervals[0].tweet_count = 0;
    ev.intervals[0].tweet_user_ids[0] = kNullAuthor;
    auto z = build_event_cube(tape, ev, params, users, {}, drop);
    for (double v : z.data()) CHECK(v == 0.0);
  }
  SUBCASE("moving a tweet across an interval boundary changes the cube") {
    Event swapped = e;
    std::swap(swapped.tweets[1].tokens, swapped.tweets[2].tokens);
    std::swap(swapped.tweets[1].user_id, swapped.tweets[2].user_id);
    auto other = build_event_cube(tape, split_into_intervals(swapped, 3, 5), params, users, {}, drop);
    CHECK(std::vector<double>(other.data().begin(), other.data().end()) !=
          std::vector<double>(cube.data().begin(), cube.data().end()));
  }
  SUBCASE("PAD row contents never reach the cube") {
    Event sparse{"s", Label::kRumor, {{"1", 0, "a", "", {4}}}};
    auto ev = split_into_intervals(sparse, 3, 5);
    auto before = build_event_cube(tape, ev, params, users, {}, drop);
    for (std::size_t d = 0; d < 4; ++d) params.word_table[d] = 9.0;
    auto after = build_event_cube(tape, ev, params, users, {}, drop);
    CHECK(std::vector<double>(before.data().begin(), before.data().end()) ==
          std::vector<double>(after.data().begin(), after.data().end()));
  }
  SUBCASE("attention trace covers every word slot") {
    AttentionTrace trace;
    build_event_cube(tape, iv, params, users, {}, drop, &trace);
    REQUIRE(trace.alphas.size() == 3);
    for (const auto& a : trace.alphas) {
      CHECK(a.size() == 5);
      CHECK(a[4] == 0.0);
      CHECK(a[0] + a[1] + a[2] + a[3] == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("end-to-end gradients") {
    std::vector<Tensor> inputs{params.word_table,
                               params.forward.input_weights,
                               params.forward.recurrent_weights,
                               params.forward.bias,
                               params.backward.input_weights,
                               params.backward.recurrent_weights,
                               params.backward.bias,
                               params.attn_weights,
                               params.attn_bias,
                               params.context,
                               users.matrix()};
    CHECK(gradient_check(inputs, [&](Tape& t) {
            SeededRng r(4);
            return build_event_cube(t, iv, params, users, {0.3, true, false, false}, r);
          }) < 1e-4);
  }
}
