#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "musem/metrics.hpp"
#include "musem/model.hpp"

namespace musem {

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 100;
  std::size_t hidden = 100;
  std::size_t dim = 300;
  std::size_t joint_dim = 100;
  double dropout = 0.2;
  std::size_t max_len = kDefaultMaxLen;
  std::size_t epochs = 10;
  std::uint64_t seed = 7;
  Variant variant = Variant::diff;
  Pooling pooling = Pooling::avg;
  bool synthetic_first = false;

  // Adam
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Share of the training file held out when no validation file is given.
  double validation_fraction = 0.1;
  bool balance_classes = true;

  ModelConfig model() const;
  // Throws InputError on zero sizes or out-of-range rates.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

/// Independent generator seeds derived from the single user seed.
struct SeedStreams {
  std::uint64_t init;
  std::uint64_t split;
  std::uint64_t shuffle;
  std::uint64_t dropout;

  static SeedStreams derive(std::uint64_t seed);
};

class AdamOptimizer {
 public:
  AdamOptimizer(const ModelParams& params, double learning_rate, double beta1, double beta2, double epsilon);

  /// Applies one update from the accumulated gradients, then zeroes them.
  void step(ModelParams& params);
  std::size_t steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, epsilon_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// Seeded shuffle, then the first round(fraction * n) go to validation.
std::pair<std::vector<PreparedExample>, std::vector<PreparedExample>> split_train_validation(
    std::vector<PreparedExample> examples, double fraction, std::uint64_t seed);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_macro_f1;
  std::optional<double> val_auc;
};

nlohmann::json to_json(const EpochLog& entry);

struct TrainResult {
  ModelParams final_params;
  ModelParams best_params;
  std::size_t best_epoch = 0;
  ClassWeights class_weights{1.0, 1.0};
  std::vector<EpochLog> log;
};

/// Mini-batch Adam on the mean class-weighted loss. After every epoch the
/// validation set (if any) is scored; best_params tracks the epoch with the
/// highest validation Macro F1 (earliest on ties), or the final epoch when
/// there is no validation data.
TrainResult train(const std::vector<PreparedExample>& train_set, const std::vector<PreparedExample>& validation,
                  const EmbeddingTable& table, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

/// Requires every example to be labelled; throws DomainError when AUC is undefined.
MetricsReport evaluate(const ModelParams& params, const std::vector<PreparedExample>& examples,
                       const EmbeddingTable& table);

// Share of examples whose predicted class matches the label.
double accuracy(const ModelParams& params, const std::vector<PreparedExample>& examples,
                const EmbeddingTable& table);

}  // namespace musem
