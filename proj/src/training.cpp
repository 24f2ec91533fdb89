#include "musem/training.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "musem/data.hpp"
#include "musem/error.hpp"

namespace musem {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<int> labels_of(const std::vector<PreparedExample>& examples) {
  std::vector<int> labels;
  labels.reserve(examples.size());
  for (const auto& ex : examples) {
    if (!ex.label) throw InputError("example " + ex.id + " has no label");
    labels.push_back(*ex.label);
  }
  return labels;
}

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config key \"") + key + "\": " + e.what());
  }
}

}  // namespace

ModelConfig TrainConfig::model() const {
  return {variant, pooling, dim, hidden, joint_dim, synthetic_first};
}

void TrainConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw InputError(std::string(name) + " must be positive");
  };
  positive(batch_size, "batch_size");
  positive(hidden, "hidden");
  positive(dim, "dim");
  positive(joint_dim, "joint_dim");
  positive(max_len, "max_len");
  positive(epochs, "epochs");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw InputError("learning_rate must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InputError("dropout must lie in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InputError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw InputError("validation_fraction must lie in [0, 1)");
  }
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"hidden", c.hidden},
          {"dim", c.dim},
          {"joint_dim", c.joint_dim},
          {"dropout", c.dropout},
          {"max_len", c.max_len},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"variant", std::string(to_string(c.variant))},
          {"pooling", std::string(to_string(c.pooling))},
          {"synthetic_first", c.synthetic_first},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon},
          {"validation_fraction", c.validation_fraction},
          {"balance_classes", c.balance_classes}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "learning_rate") read_key(j, "learning_rate", c.learning_rate);
    else if (key == "batch_size") read_key(j, "batch_size", c.batch_size);
    else if (key == "hidden") read_key(j, "hidden", c.hidden);
    else if (key == "dim") read_key(j, "dim", c.dim);
    else if (key == "joint_dim") read_key(j, "joint_dim", c.joint_dim);
    else if (key == "dropout") read_key(j, "dropout", c.dropout);
    else if (key == "max_len") read_key(j, "max_len", c.max_len);
    else if (key == "epochs") read_key(j, "epochs", c.epochs);
    else if (key == "seed") read_key(j, "seed", c.seed);
    else if (key == "synthetic_first") read_key(j, "synthetic_first", c.synthetic_first);
    else if (key == "beta1") read_key(j, "beta1", c.beta1);
    else if (key == "beta2") read_key(j, "beta2", c.beta2);
    else if (key == "epsilon") read_key(j, "epsilon", c.epsilon);
    else if (key == "validation_fraction") read_key(j, "validation_fraction", c.validation_fraction);
    else if (key == "balance_classes") read_key(j, "balance_classes", c.balance_classes);
    else if (key == "variant" || key == "pooling") {
      if (!value.is_string()) throw InputError("config key \"" + key + "\" must be a string");
      if (key == "variant") c.variant = parse_variant(value.get<std::string>());
      else c.pooling = parse_pooling(value.get<std::string>());
    } else {
      throw InputError("unknown config key \"" + key + "\"");
    }
  }
  return c;
}

SeedStreams SeedStreams::derive(std::uint64_t seed) {
  std::uint64_t state = seed;
  SeedStreams s{};
  s.init = splitmix64(state);
  s.split = splitmix64(state);
  s.shuffle = splitmix64(state);
  s.dropout = splitmix64(state);
  return s;
}

AdamOptimizer::AdamOptimizer(const ModelParams& params, double learning_rate, double beta1, double beta2,
                             double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const auto* t : params.tensors()) {
    m_.emplace_back(t->value.size(), 0.0);
    v_.emplace_back(t->value.size(), 0.0);
  }
}

void AdamOptimizer::step(ModelParams& params) {
  ++t_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto tensors = params.tensors();
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    auto& value = tensors[k]->value.values;
    auto& grad = tensors[k]->grad.values;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * grad[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= lr_ * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
    tensors[k]->zero_grad();
  }
}

std::pair<std::vector<PreparedExample>, std::vector<PreparedExample>> split_train_validation(
    std::vector<PreparedExample> examples, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw InputError("validation fraction must lie in [0, 1)");
  Rng rng(seed);
  rng.shuffle(examples);
  const auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(examples.size())));
  std::vector<PreparedExample> validation(std::make_move_iterator(examples.begin()),
                                          std::make_move_iterator(examples.begin() + static_cast<std::ptrdiff_t>(n_val)));
  examples.erase(examples.begin(), examples.begin() + static_cast<std::ptrdiff_t>(n_val));
  return {std::move(examples), std::move(validation)};
}

nlohmann::json to_json(const EpochLog& e) {
  nlohmann::json j = {{"epoch", e.epoch}, {"train_loss", e.train_loss}};
  j["val_macro_f1"] = e.val_macro_f1 ? nlohmann::json(*e.val_macro_f1) : nlohmann::json(nullptr);
  j["val_auc"] = e.val_auc ? nlohmann::json(*e.val_auc) : nlohmann::json(nullptr);
  return j;
}

TrainResult train(const std::vector<PreparedExample>& train_set, const std::vector<PreparedExample>& validation,
                  const EmbeddingTable& table, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  if (train_set.empty()) throw InputError("training set is empty");
  if (table.dim() != config.dim) {
    throw InputError("embedding dimension " + std::to_string(table.dim()) + " does not match configured dim " +
                     std::to_string(config.dim));
  }
  const std::vector<int> labels = labels_of(train_set);
  const std::vector<int> val_labels = labels_of(validation);

  const SeedStreams seeds = SeedStreams::derive(config.seed);
  TrainResult result;
  if (config.balance_classes) {
    ClassCounts counts;
    for (int y : labels) (y == kCongruent ? counts.congruent : counts.incongruent)++;
    result.class_weights = balanced_class_weights(counts);
  }
  result.final_params = init_params(config.model(), seeds.init);
  ModelParams& params = result.final_params;
  AdamOptimizer optimizer(params, config.learning_rate, config.beta1, config.beta2, config.epsilon);
  Rng shuffle_rng(seeds.shuffle);
  Rng dropout_rng(seeds.dropout);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::optional<double> best_f1;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double total_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = train_set[order[k]];
        const Vec scales =
            config.dropout > 0.0 ? dropout_scales(config.joint_dim, config.dropout, dropout_rng) : Vec{};
        batch_loss += accumulate_gradients(params, embed_pair(ex, table), labels[order[k]], result.class_weights,
                                           scale, scales);
      }
      if (!std::isfinite(batch_loss)) {
        throw DomainError("non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                          std::to_string(batch_index));
      }
      total_loss += batch_loss;
      optimizer.step(params);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = total_loss / static_cast<double>(train_set.size());
    if (!validation.empty()) {
      const auto preds = predict(params, validation, table);
      std::vector<int> predicted;
      std::vector<double> scores;
      for (const auto& p : preds) {
        predicted.push_back(p.predicted);
        scores.push_back(p.p_incongruent);
      }
      entry.val_macro_f1 = macro_f1(val_labels, predicted);
      entry.val_auc = try_auc(val_labels, scores);
      if (!best_f1 || *entry.val_macro_f1 > *best_f1) {
        best_f1 = entry.val_macro_f1;
        result.best_params = params;
        result.best_epoch = epoch;
      }
    }
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  if (validation.empty()) {
    result.best_params = params;
    result.best_epoch = config.epochs;
  }
  return result;
}

MetricsReport evaluate(const ModelParams& params, const std::vector<PreparedExample>& examples,
                       const EmbeddingTable& table) {
  const std::vector<int> labels = labels_of(examples);
  const auto preds = predict(params, examples, table);
  std::vector<int> predicted;
  std::vector<double> scores;
  for (const auto& p : preds) {
    predicted.push_back(p.predicted);
    scores.push_back(p.p_incongruent);
  }
  return compute_metrics(labels, predicted, scores);
}

double accuracy(const ModelParams& params, const std::vector<PreparedExample>& examples,
                const EmbeddingTable& table) {
  const std::vector<int> labels = labels_of(examples);
  const auto preds = predict(params, examples, table);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i].predicted == labels[i] ? 1 : 0;
  return examples.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(examples.size());
}

}  // namespace musem
