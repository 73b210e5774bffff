#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rumor/config.hpp"
#include "rumor/corpus.hpp"
#include "rumor/model.hpp"

namespace rumor {

// ---- metrics ---------------------------------------------------------------

/// Rumor is the positive class.
struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Confusion&) const = default;
};

struct ClassMetrics {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  ClassMetrics rumor;
  ClassMetrics nonrumor;
  Confusion confusion;
};

/// Ratios with 0 when a denominator is 0.
MetricsReport metrics_from_confusion(const Confusion& c);

/// {"accuracy", "rumor": {precision, recall, f1}, "nonrumor": {...},
///  "confusion": {tp, fp, fn, tn}}
std::string metrics_to_json(const MetricsReport& report);

// ---- corpus preparation ----------------------------------------------------

/// Builds a vocabulary from the corpus and a user
/// table holding every author. With `pretrained`, its rows are kept and
/// missing authors are appended with random rows.
Model build_model(const TrainConfig& config, std::span<const Event> corpus,
                  std::optional<UserTable> pretrained = {});

/// Tokenizes with the model's vocabulary and splits into intervals.
std::vector<IntervalizedEvent> prepare_events(const Model& model, std::span<const Event> events);

// ---- training --------------------------------------------------------------

struct CurveRow {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
};

struct TrainResult {
  std::vector<CurveRow> curve;
  bool converged = false;  // stopped by the convergence rule rather than the cap
};

/// Called after each epoch; returning false stops training.
using EpochCallback = std::function<bool(const CurveRow&)>;

/// Batch-size-1 Adadelta training over `events` in shuffled order each
/// epoch. Stops when the epoch-mean loss improves by less than
/// min_improvement for `patience` consecutive epochs, at max_epochs, or when
/// the callback says so. Deterministic given the config seeds.
TrainResult train(Model& model, std::span<const IntervalizedEvent> events, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

void write_curve_csv(std::ostream& out, std::span<const CurveRow> curve);
void save_curve_csv(std::span<const CurveRow> curve, const std::filesystem::path& path);

// ---- evaluation ------------------------------------------------------------

struct Prediction {
  std::string event_id;
  double probability = 0.0;
  Label label = Label::kNonRumor;
};

std::vector<Prediction> predict(const Model& model, std::span<const IntervalizedEvent> events);

MetricsReport evaluate(const Model& model, std::span<const IntervalizedEvent> events);

/// Fold index per event, stratified by label: each class is shuffled with
/// the seed and dealt round-robin, the deal continuing across classes.
std::vector<std::size_t> stratified_folds(std::span<const Label> labels, std::size_t folds, std::uint64_t seed);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per class, round(fraction * class size) shuffled events go to test.
Split stratified_holdout(std::span<const Label> labels, double test_fraction, std::uint64_t seed);

struct CvReport {
  std::vector<MetricsReport> folds;
  MetricsReport mean;  // metric averages over folds; confusion summed
};

/// Trains a fresh model per fold on the other folds (vocabulary and user
/// table built from the training part only) and evaluates on the fold.
CvReport cross_validate(std::span<const Event> corpus, const TrainConfig& config,
                        const std::optional<UserTable>& pretrained = {});

// ---- checkpoints -----------------------------------------------------------

void write_checkpoint(std::ostream& out, const Model& model);
Model read_checkpoint(std::istream& in);
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

// ---- gradient check --------------------------------------------------------

struct GradcheckOptions {
  ModelConfig config = default_config();
  std::size_t vocab_size = 30;
  std::uint64_t seed = 1;
  double step = 1e-5;
  double floor = 1e-6;  // denominator guard
  bool zero_parameters = false;
  /// Runs between backward and the comparison; test fixtures use it to
  /// corrupt gradients.
  std::function<void(const Model&)> after_backward;

  static ModelConfig default_config();
};

struct GradcheckGroup {
  std::string group;
  double max_relative_error = 0.0;
  std::size_t checked = 0;
};

struct GradcheckReport {
  std::vector<GradcheckGroup> groups;  // in parameter order
  double loss = 0.0;
  double max_error() const;
};

/// Compares backward gradients of the loss on one random event against
/// central differences for every parameter. Relative error per entry is
/// |a - n| / max(|a|, |n|, floor).
GradcheckReport gradcheck(const GradcheckOptions& options);

std::string format_gradcheck(const GradcheckReport& report);

}  // namespace rumor
