#include "rumor/training.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "json.hpp"
#include "rumor/adadelta.hpp"
#include "rumor/errors.hpp"

namespace rumor {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::size_t hit, std::size_t false_alarm, std::size_t miss) {
  ClassMetrics m;
  m.precision = ratio(hit, hit + false_alarm);
  m.recall = ratio(hit, hit + miss);
  m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

// Independent random streams per purpose.
enum Stream : std::uint64_t { kInitStream = 1, kShuffleStream = 2, kDropoutStream = 3, kFoldStream = 4 };

}  // namespace

MetricsReport metrics_from_confusion(const Confusion& c) {
  MetricsReport r;
  r.confusion = c;
  r.accuracy = ratio(c.tp + c.tn, c.total());
  r.rumor = class_metrics(c.tp, c.fp, c.fn);
  r.nonrumor = class_metrics(c.tn, c.fn, c.fp);
  return r;
}

std::string metrics_to_json(const MetricsReport& r) {
  auto cls = [](const ClassMetrics& m) {
    nlohmann::ordered_json j;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    return j;
  };
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["rumor"] = cls(r.rumor);
  j["nonrumor"] = cls(r.nonrumor);
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn}};
  return j.dump(2);
}

Model build_model(const TrainConfig& config, std::span<const Event> corpus, std::optional<UserTable> pretrained) {
  config.validate();
  Vocabulary vocab = Vocabulary::build(corpus, config.min_count);
  std::vector<std::string> authors;
  std::unordered_set<std::string> seen;
  for (const Event& e : corpus)
    for (const Tweet& t : e.tweets)
      if (seen.insert(t.user_id).second) authors.push_back(t.user_id);

  SeededRng rng(SeededRng::derive(config.model.seed, kInitStream));
  UserTable users(config.model.user_dim);
  if (pretrained) {
    if (pretrained->dim() != config.model.user_dim) {
      throw ConfigError("pretrained user table has width " + std::to_string(pretrained->dim()) + ", expected " +
                        std::to_string(config.model.user_dim));
    }
    users = std::move(*pretrained);
    users.add_users(authors, rng);
  } else {
    users = UserTable::init(authors, config.model.user_dim, rng);
  }
  return Model::init(config.model, std::move(vocab), std::move(users), rng);
}

std::vector<IntervalizedEvent> prepare_events(const Model& model, std::span<const Event> events) {
  std::vector<IntervalizedEvent> out;
  out.reserve(events.size());
  for (const Event& e : events) out.push_back(prepare_event(model, e));
  return out;
}

TrainResult train(Model& model, std::span<const IntervalizedEvent> events, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (events.empty()) throw ConfigError("training needs at least one event");
  auto params = model.parameters();
  std::vector<AdadeltaState> states;
  states.reserve(params.size());
  for (const auto& p : params) states.emplace_back(p.tensor, config.model.rho, config.model.eps);

  SeededRng shuffler(SeededRng::derive(config.shuffle_seed, kShuffleStream));
  SeededRng dropout_rng(SeededRng::derive(config.model.seed, kDropoutStream));
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  double previous = std::numeric_limits<double>::infinity();
  std::size_t stalled = 0;
  for (std::size_t epoch = 1; epoch <= config.model.max_epochs; ++epoch) {
    shuffler.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    std::size_t correct = 0;
    for (std::size_t i : order) {
      const IntervalizedEvent& event = events[i];
      Tape tape;
      Tensor y = forward_event(tape, model, event, Mode::kTrain, dropout_rng);
      Tensor loss = bce_loss(tape, y, to_int(event.label));
      if (!std::isfinite(loss.item())) {
        throw TrainingError("non-finite loss on event " + event.event_id + " in epoch " + std::to_string(epoch));
      }
      tape.backward(loss);
      for (std::size_t k = 0; k < params.size(); ++k)
        if (params[k].tensor.requires_grad()) adadelta_step(params[k].tensor, states[k]);
      total += loss.item();
      correct += decide(y.item()) == event.label;
    }
    const CurveRow row{epoch, total / static_cast<double>(events.size()), ratio(correct, events.size())};
    result.curve.push_back(row);
    if (on_epoch && !on_epoch(row)) break;
    if (previous - row.train_loss < config.min_improvement) {
      if (++stalled >= config.patience) {
        result.converged = true;
        break;
      }
    } else {
      stalled = 0;
    }
    previous = row.train_loss;
  }
  return result;
}

void write_curve_csv(std::ostream& out, std::span<const CurveRow> curve) {
  out << "epoch,train_loss,train_accuracy\n";
  const auto old = out.precision(17);
  for (const auto& row : curve) out << row.epoch << ',' << row.train_loss << ',' << row.train_accuracy << '\n';
  out.precision(old);
}

void save_curve_csv(std::span<const CurveRow> curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write curve " + path.string());
  write_curve_csv(out, curve);
  if (!out) throw IoError("failed writing curve " + path.string());
}

std::vector<Prediction> predict(const Model& model, std::span<const IntervalizedEvent> events) {
  std::vector<Prediction> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    const double prob = predict_probability(model, e);
    out.push_back({e.event_id, prob, decide(prob)});
  }
  return out;
}

MetricsReport evaluate(const Model& model, std::span<const IntervalizedEvent> events) {
  Confusion c;
  for (const auto& e : events) {
    const bool said_rumor = decide(predict_probability(model, e)) == Label::kRumor;
    const bool is_rumor = e.label == Label::kRumor;
    if (said_rumor && is_rumor) ++c.tp;
    else if (said_rumor) ++c.fp;
    else if (is_rumor) ++c.fn;
    else ++c.tn;
  }
  return metrics_from_confusion(c);
}

std::vector<std::size_t> stratified_folds(std::span<const Label> labels, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (labels.size() < folds) {
    throw ConfigError("cannot split " + std::to_string(labels.size()) + " events into " + std::to_string(folds) +
                      " folds");
  }
  SeededRng rng(seed);
  std::vector<std::size_t> assignment(labels.size());
  std::size_t deal = 0;
  for (Label cls : {Label::kRumor, Label::kNonRumor}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(i);
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t i : members) assignment[i] = deal++ % folds;
  }
  return assignment;
}

Split stratified_holdout(std::span<const Label> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test fraction must be in (0, 1)");
  SeededRng rng(seed);
  std::vector<bool> is_test(labels.size(), false);
  for (Label cls : {Label::kRumor, Label::kNonRumor}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(i);
    rng.shuffle(std::span<std::size_t>(members));
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
    for (std::size_t j = 0; j < n_test; ++j) is_test[members[j]] = true;
  }
  Split split;
  for (std::size_t i = 0; i < labels.size(); ++i) (is_test[i] ? split.test : split.train).push_back(i);
  return split;
}

CvReport cross_validate(std::span<const Event> corpus, const TrainConfig& config,
                        const std::optional<UserTable>& pretrained) {
  config.validate();
  std::vector<Label> labels;
  for (const Event& e : corpus) labels.push_back(e.label);
  const auto assignment =
      stratified_folds(labels, config.folds, SeededRng::derive(config.shuffle_seed, kFoldStream));

  CvReport report;
  for (std::size_t f = 0; f < config.folds; ++f) {
    std::vector<Event> train_part, test_part;
    for (std::size_t i = 0; i < corpus.size(); ++i) (assignment[i] == f ? test_part : train_part).push_back(corpus[i]);
    Model model = build_model(config, train_part, pretrained);
    train(model, prepare_events(model, train_part), config);
    report.folds.push_back(evaluate(model, prepare_events(model, test_part)));
  }

  MetricsReport& mean = report.mean;
  const double n = static_cast<double>(report.folds.size());
  auto accumulate = [n](ClassMetrics& into, const ClassMetrics& m) {
    into.precision += m.precision / n;
    into.recall += m.recall / n;
    into.f1 += m.f1 / n;
  };
  for (const auto& r : report.folds) {
    mean.accuracy += r.accuracy / n;
    accumulate(mean.rumor, r.rumor);
    accumulate(mean.nonrumor, r.nonrumor);
    mean.confusion.tp += r.confusion.tp;
    mean.confusion.fp += r.confusion.fp;
    mean.confusion.fn += r.confusion.fn;
    mean.confusion.tn += r.confusion.tn;
  }
  return report;
}

}  // namespace rumor
