#include "rumor/encoder.hpp"

#include <algorithm>

#include "rumor/errors.hpp"

namespace rumor {

namespace {

Tensor uniform_param(Shape shape, SeededRng& rng) {
  Tensor t(std::move(shape));
  fill_uniform(t, rng);
  t.set_requires_grad(true);
  return t;
}

LstmParams init_lstm(std::size_t word_dim, std::size_t hidden, SeededRng& rng) {
  LstmParams p;
  p.input_weights = uniform_param({word_dim, 4 * hidden}, rng);
  p.recurrent_weights = uniform_param({hidden, 4 * hidden}, rng);
  p.bias = uniform_param({4 * hidden}, rng);
  return p;
}

Tensor run_lstm(Tape& tape, const Tensor& x, const LstmParams& p, Direction direction) {
  return lstm_sequence(tape, add_row_bias(tape, matmul(tape, x, p.input_weights), p.bias), p.recurrent_weights,
                       direction);
}

std::size_t real_prefix(const Interval& interval) {
  return static_cast<std::size_t>(
      std::find(interval.word_mask.begin(), interval.word_mask.end(), 0) - interval.word_mask.begin());
}

}  // namespace

EncoderParams EncoderParams::init(std::size_t vocab_size, std::size_t word_dim, std::size_t hidden,
                                  SeededRng& rng) {
  if (vocab_size < 2 || word_dim == 0 || hidden == 0) throw ConfigError("encoder sizes must be positive");
  EncoderParams e;
  e.word_table = uniform_param({vocab_size, word_dim}, rng);
  for (std::size_t d = 0; d < word_dim; ++d) e.word_table[d] = 0.0;
  e.forward = init_lstm(word_dim, hidden, rng);
  e.backward = init_lstm(word_dim, hidden, rng);
  e.attn_weights = uniform_param({2 * hidden, 2 * hidden}, rng);
  e.attn_bias = uniform_param({2 * hidden}, rng);
  e.context = uniform_param({2 * hidden}, rng);
  return e;
}

Tensor embed_words(Tape& tape, std::span<const std::size_t> word_indices, const Tensor& word_table) {
  return lookup_rows(tape, word_table, word_indices);
}

Tensor bilstm_encode(Tape& tape, const Tensor& x, const EncoderParams& params) {
  if (x.rank() != 2 || x.dim(1) != params.word_dim()) {
    throw DimensionError("bilstm_encode: input " + shape_to_string(x.shape()) + " for word width " +
                         std::to_string(params.word_dim()));
  }
  return concat_cols(tape, run_lstm(tape, x, params.forward, Direction::kForward),
                     run_lstm(tape, x, params.backward, Direction::kReverse));
}

AttentionResult word_attention(Tape& tape, const Tensor& h, std::span<const std::uint8_t> mask,
                               const EncoderParams& params) {
  if (h.rank() != 2 || h.dim(0) != mask.size()) {
    throw DimensionError("word_attention: states " + shape_to_string(h.shape()) + " with mask of length " +
                         std::to_string(mask.size()));
  }
  Tensor u = activation(tape, add_row_bias(tape, matmul(tape, h, params.attn_weights), params.attn_bias),
                        Activation::kTanh);
  Tensor alpha = masked_softmax(tape, matvec(tape, u, params.context), mask);
  return {alpha, vecmat(tape, alpha, h)};
}

Tensor build_interval_matrix(Tape& tape, const Tensor& interval_vector, const Interval& interval, std::size_t q,
                             const UserTable& users, bool no_user_context) {
  const std::size_t D = users.dim();
  if (interval_vector.rank() != 1 || interval_vector.dim(0) != D) {
    throw ConfigError("interval vector width " + std::to_string(interval_vector.size()) +
                      " does not match user embedding width " + std::to_string(D));
  }
  if (interval.tweet_user_ids.size() != q) {
    throw DimensionError("interval lists " + std::to_string(interval.tweet_user_ids.size()) + " authors, expected " +
                         std::to_string(q));
  }
  Tensor left = repeat_rows(tape, interval_vector, interval.tweet_count, q);
  if (no_user_context) return concat_cols(tape, left, Tensor({q, D}));
  std::vector<std::size_t> rows(q, 0);
  for (std::size_t x = 0; x < interval.tweet_count; ++x) rows[x] = users.row_of(interval.tweet_user_ids[x]);
  return concat_cols(tape, left, lookup_rows(tape, users.matrix(), rows));
}

Tensor encode_interval(Tape& tape, const Interval& interval, const EncoderParams& params, bool no_attention,
                       std::vector<double>* alpha_out) {
  const std::size_t n = real_prefix(interval);
  if (alpha_out) alpha_out->assign(interval.word_mask.size(), 0.0);
  const std::size_t width = no_attention ? params.word_dim() : 2 * params.hidden();
  if (n == 0) return Tensor({width});

  const std::span<const std::size_t> words(interval.word_indices.data(), n);
  Tensor x = embed_words(tape, words, params.word_table);
  const Mask all(n, 1);
  if (no_attention) return masked_mean_rows(tape, x, all);

  auto [alpha, vec] = word_attention(tape, bilstm_encode(tape, x, params), all, params);
  if (alpha_out) std::copy(alpha.data().begin(), alpha.data().end(), alpha_out->begin());
  return vec;
}

Tensor build_event_cube(Tape& tape, const IntervalizedEvent& event, const EncoderParams& params,
                        const UserTable& users, const EncodeOptions& options, SeededRng& rng,
                        AttentionTrace* trace) {
  if (event.intervals.empty()) throw DimensionError("event " + event.event_id + " has no intervals");
  if (trace) trace->alphas.clear();
  std::vector<Tensor> matrices;
  matrices.reserve(event.intervals.size());
  for (const auto& interval : event.intervals) {
    std::vector<double> alpha;
    Tensor vec = encode_interval(tape, interval, params, options.no_attention,
                                 trace && !options.no_attention ? &alpha : nullptr);
    if (trace && !options.no_attention) trace->alphas.push_back(std::move(alpha));
    vec = dropout(tape, vec, options.dropout, rng, options.training);
    matrices.push_back(build_interval_matrix(tape, vec, interval, event.q, users, options.no_user_context));
  }
  return stack(tape, matrices);
}

}  // namespace rumor
