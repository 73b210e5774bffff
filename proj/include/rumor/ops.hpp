#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rumor/rng.hpp"
#include "rumor/tape.hpp"
#include "rumor/tensor.hpp"

namespace rumor {

/// One entry per sequence position, nonzero = real token.
using Mask = std::vector<std::uint8_t>;

enum class Activation { kTanh, kSigmoid, kRelu };

// Differentiable primitives. Each one computes its result eagerly and, when
// the tape is recording and any input requires a gradient, records a backward
// rule that accumulates into the inputs' gradient buffers.

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);       // [m,k]x[k,n] -> [m,n]
Tensor matvec(Tape& tape, const Tensor& a, const Tensor& v);       // [m,k]x[k]   -> [m]
Tensor vecmat(Tape& tape, const Tensor& v, const Tensor& a);       // [m]x[m,n]   -> [n]
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);          // same shape
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);          // elementwise
Tensor add_row_bias(Tape& tape, const Tensor& x, const Tensor& bias);
Tensor activation(Tape& tape, const Tensor& x, Activation kind);
Tensor sum(Tape& tape, const Tensor& x);
Tensor dot(Tape& tape, const Tensor& a, const Tensor& b);

/// Softmax over positions with a nonzero mask; masked positions are exactly 0.
/// An all-false mask yields the zero vector.
Tensor masked_softmax(Tape& tape, const Tensor& logits, std::span<const std::uint8_t> mask);

/// Valid (unpadded, stride 1) 3x3 convolution over the first two axes of
/// cube [A,B,C] with filters [M,3,3,C], followed by ReLU. Output [M,A-2,B-2].
Tensor conv_valid(Tape& tape, const Tensor& cube, const Tensor& filters, const Tensor& biases);

/// Per-map maximum of [M,H,W] -> [M]. Gradient goes to the first argmax in
/// row-major order.
Tensor global_max_pool(Tape& tape, const Tensor& maps);

/// Gathers rows of table [R,D] -> [n,D]. Row 0 is the reserved null row: it
/// reads as zeros and never receives gradient. Repeated indices share the
/// table row's gradient accumulator.
Tensor lookup_rows(Tape& tape, const Tensor& table, std::span<const std::size_t> indices);

enum class Direction { kForward, kReverse };

/// Runs an LSTM over precomputed input projections [p,4H] (gate blocks in the
/// order input, forget, output, candidate) with recurrent weights [H,4H],
/// starting from zero state. Output [p,H]; row t is the hidden state after
/// consuming position t, whichever direction the sequence is read in.
Tensor lstm_sequence(Tape& tape, const Tensor& projected, const Tensor& recurrent, Direction direction);

Tensor concat_cols(Tape& tape, const Tensor& left, const Tensor& right);  // [m,a],[m,b] -> [m,a+b]

/// [D] -> [rows,D] with the first `filled` rows equal to v and the rest zero.
Tensor repeat_rows(Tape& tape, const Tensor& v, std::size_t filled, std::size_t rows);

/// Stacks equally shaped tensors along a new leading axis.
Tensor stack(Tape& tape, std::span<const Tensor> parts);

/// Mean of the rows of [p,D] selected by mask; zero vector when none are.
Tensor masked_mean_rows(Tape& tape, const Tensor& x, std::span<const std::uint8_t> mask);

/// Inverted dropout. Identity when !training or rate == 0.
Tensor dropout(Tape& tape, const Tensor& x, double rate, SeededRng& rng, bool training);

inline constexpr double kProbabilityClamp = 1e-12;

/// Binary cross-entropy of a probability [1] against a 0/1 target; the
/// probability is clamped to [1e-12, 1 - 1e-12].
Tensor bce_loss(Tape& tape, const Tensor& probability, int target);

}  // namespace rumor
