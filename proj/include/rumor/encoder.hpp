#pragma once

#include <vector>

#include "rumor/intervals.hpp"
#include "rumor/ops.hpp"
#include "rumor/user_table.hpp"

namespace rumor {

/// One LSTM direction. Gate blocks in every 4H axis are ordered input,
/// forget, output, candidate.
struct LstmParams {
  Tensor input_weights;      // [Dw, 4H]
  Tensor recurrent_weights;  // [H, 4H]
  Tensor bias;               // [4H]
};

struct EncoderParams {
  Tensor word_table;    // [|V|, Dw], row 0 = PAD
  LstmParams forward;
  LstmParams backward;
  Tensor attn_weights;  // [2H, 2H]
  Tensor attn_bias;     // [2H]
  Tensor context;       // [2H]

  /// Uniform init in +-kInitRange, PAD row zero, everything trainable.
  static EncoderParams init(std::size_t vocab_size, std::size_t word_dim, std::size_t hidden, SeededRng& rng);

  std::size_t word_dim() const { return word_table.dim(1); }
  std::size_t hidden() const { return forward.recurrent_weights.dim(0); }
};

/// [p, Dw]: row o is L[word_indices[o]]; PAD rows read as zero.
Tensor embed_words(Tape& tape, std::span<const std::size_t> word_indices, const Tensor& word_table);

/// [p, Dw] -> [p, 2H], forward states in the left half, backward in the right.
Tensor bilstm_encode(Tape& tape, const Tensor& x, const EncoderParams& params);

struct AttentionResult {
  Tensor alpha;     // [p]
  Tensor interval;  // I_k, [2H]
};

AttentionResult word_attention(Tape& tape, const Tensor& h, std::span<const std::uint8_t> mask,
                               const EncoderParams& params);

/// [q, 2D]: row x is I_k (+) U[author_x] for real tweets and zero past
/// tweet_count. With no_user_context the right half is zero throughout.
Tensor build_interval_matrix(Tape& tape, const Tensor& interval_vector, const Interval& interval, std::size_t q,
                             const UserTable& users, bool no_user_context = false);

struct EncodeOptions {
  double dropout = 0.0;
  bool training = false;
  bool no_attention = false;
  bool no_user_context = false;
};

/// Per-interval attention weights over the p word slots (zeros on PAD and
/// on empty intervals). Not filled when no_attention is set.
struct AttentionTrace {
  std::vector<std::vector<double>> alphas;
};

/// Interval vector of one interval: the attention-pooled bi-LSTM states, or
/// the masked mean of word embeddings with no_attention. The LSTMs run over
/// the real-token prefix only; an empty interval gives the zero vector.
Tensor encode_interval(Tape& tape, const Interval& interval, const EncoderParams& params, bool no_attention,
                       std::vector<double>* alpha_out = nullptr);

/// [k, q, 2D] cube of interval matrices in interval order. Dropout (training
/// only) is applied to each interval vector before repetition.
Tensor build_event_cube(Tape& tape, const IntervalizedEvent& event, const EncoderParams& params,
                        const UserTable& users, const EncodeOptions& options, SeededRng& rng,
                        AttentionTrace* trace = nullptr);

}  // namespace rumor
