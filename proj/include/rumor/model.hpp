#pragma once

#include <string>
#include <vector>

#include "rumor/config.hpp"
#include "rumor/encoder.hpp"
#include "rumor/vocabulary.hpp"

namespace rumor {

struct ClassifierParams {
  Tensor filters;        // [M, 3, 3, 2D]
  Tensor filter_bias;    // [M]
  Tensor dense_weights;  // [M]
  Tensor dense_bias;     // [1]

  static ClassifierParams init(std::size_t maps, std::size_t depth, SeededRng& rng);
};

/// [M, k-2, q-2] -> [M], one global max per feature map.
Tensor pool_and_concat(Tape& tape, const Tensor& maps);

/// sigma(w . dropout(c) + b) as a [1] tensor.
Tensor classify(Tape& tape, const Tensor& c, const ClassifierParams& params, double dropout_rate, SeededRng& rng,
                bool training);

/// Probability above 0.5 is a rumor; exactly 0.5 is not.
inline Label decide(double probability) { return probability > 0.5 ? Label::kRumor : Label::kNonRumor; }

struct NamedTensor {
  std::string name;
  std::string group;  // word_table, lstm_forward, lstm_backward, attention, filters, dense, user_rows
  Tensor tensor;
};

struct Model {
  ModelConfig config;
  Vocabulary vocab;
  EncoderParams encoder;
  ClassifierParams classifier;
  UserTable users;

  /// Fresh parameters. The user table is taken as given (random or
  /// pretrained) and must have width config.user_dim.
  static Model init(const ModelConfig& config, Vocabulary vocab, UserTable users, SeededRng& rng);

  /// Every tensor in a fixed order, trainable or not.
  std::vector<NamedTensor> parameters() const;
};

enum class Mode { kTrain, kInfer };

struct AblationFlags {
  bool no_attention = false;
  bool no_user_context = false;
};

/// End-to-end probability [1] for one event using the model's configured
/// ablation flags.
Tensor forward_event(Tape& tape, const Model& model, const IntervalizedEvent& event, Mode mode, SeededRng& rng,
                     AttentionTrace* trace = nullptr);

/// Same as forward_event with the flags overridden.
Tensor forward_ablation(Tape& tape, const Model& model, const IntervalizedEvent& event, AblationFlags flags,
                        Mode mode, SeededRng& rng, AttentionTrace* trace = nullptr);

/// Inference-mode probability without recording anything.
double predict_probability(const Model& model, const IntervalizedEvent& event, AttentionTrace* trace = nullptr);

/// Tokenizes with the model vocabulary and splits with the model's k and p.
IntervalizedEvent prepare_event(const Model& model, Event event);

}  // namespace rumor
