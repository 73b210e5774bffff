#include "rumor/model.hpp"

#include "rumor/errors.hpp"

namespace rumor {

ClassifierParams ClassifierParams::init(std::size_t maps, std::size_t depth, SeededRng& rng) {
  if (maps == 0 || depth == 0) throw ConfigError("classifier sizes must be positive");
  ClassifierParams c;
  c.filters = Tensor({maps, 3, 3, depth});
  c.filter_bias = Tensor({maps});
  c.dense_weights = Tensor({maps});
  c.dense_bias = Tensor({1});
  for (Tensor* t : {&c.filters, &c.filter_bias, &c.dense_weights, &c.dense_bias}) {
    fill_uniform(*t, rng);
    t->set_requires_grad(true);
  }
  return c;
}

Tensor pool_and_concat(Tape& tape, const Tensor& maps) { return global_max_pool(tape, maps); }

Tensor classify(Tape& tape, const Tensor& c, const ClassifierParams& params, double dropout_rate, SeededRng& rng,
                bool training) {
  Tensor dropped = dropout(tape, c, dropout_rate, rng, training);
  return activation(tape, add(tape, dot(tape, params.dense_weights, dropped), params.dense_bias),
                    Activation::kSigmoid);
}

Model Model::init(const ModelConfig& config, Vocabulary vocab, UserTable users, SeededRng& rng) {
  config.validate();
  if (users.dim() != config.user_dim) {
    throw ConfigError("user table width " + std::to_string(users.dim()) + " does not match user_dim " +
                      std::to_string(config.user_dim));
  }
  Model m{config, std::move(vocab), {}, {}, std::move(users)};
  m.encoder = EncoderParams::init(m.vocab.size(), config.word_dim, config.hidden, rng);
  m.classifier = ClassifierParams::init(config.filters, 2 * config.user_dim, rng);
  m.users.set_trainable(true);
  return m;
}

std::vector<NamedTensor> Model::parameters() const {
  const auto& e = encoder;
  const auto& c = classifier;
  return {
      {"word_table", "word_table", e.word_table},
      {"lstm_forward.input_weights", "lstm_forward", e.forward.input_weights},
      {"lstm_forward.recurrent_weights", "lstm_forward", e.forward.recurrent_weights},
      {"lstm_forward.bias", "lstm_forward", e.forward.bias},
      {"lstm_backward.input_weights", "lstm_backward", e.backward.input_weights},
      {"lstm_backward.recurrent_weights", "lstm_backward", e.backward.recurrent_weights},
      {"lstm_backward.bias", "lstm_backward", e.backward.bias},
      {"attention.weights", "attention", e.attn_weights},
      {"attention.bias", "attention", e.attn_bias},
      {"attention.context", "attention", e.context},
      {"filters.weights", "filters", c.filters},
      {"filters.bias", "filters", c.filter_bias},
      {"dense.weights", "dense", c.dense_weights},
      {"dense.bias", "dense", c.dense_bias},
      {"user_rows", "user_rows", users.matrix()},
  };
}

Tensor forward_ablation(Tape& tape, const Model& model, const IntervalizedEvent& event, AblationFlags flags,
                        Mode mode, SeededRng& rng, AttentionTrace* trace) {
  const bool training = mode == Mode::kTrain;
  if (flags.no_attention && model.config.word_dim != model.config.user_dim) {
    throw ConfigError("no_attention needs word_dim == user_dim");
  }
  EncodeOptions options{model.config.dropout, training, flags.no_attention, flags.no_user_context};
  Tensor cube = build_event_cube(tape, event, model.encoder, model.users, options, rng, trace);
  Tensor maps = conv_valid(tape, cube, model.classifier.filters, model.classifier.filter_bias);
  return classify(tape, pool_and_concat(tape, maps), model.classifier, model.config.dropout, rng, training);
}

Tensor forward_event(Tape& tape, const Model& model, const IntervalizedEvent& event, Mode mode, SeededRng& rng,
                     AttentionTrace* trace) {
  return forward_ablation(tape, model, event, {model.config.no_attention, model.config.no_user_context}, mode, rng,
                          trace);
}

double predict_probability(const Model& model, const IntervalizedEvent& event, AttentionTrace* trace) {
  Tape tape(false);
  SeededRng unused(0);
  return forward_event(tape, model, event, Mode::kInfer, unused, trace).item();
}

IntervalizedEvent prepare_event(const Model& model, Event event) {
  sort_tweets(event);
  for (auto& tweet : event.tweets) tweet.tokens = model.vocab.encode(tweet.text);
  return split_into_intervals(event, model.config.k, model.config.p, model.config.q_min);
}

}  // namespace rumor
