#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "musem/attention.hpp"
#include "musem/classifier.hpp"
#include "musem/encoder.hpp"
#include "musem/headline.hpp"
#include "musem/text.hpp"

namespace musem {

struct ExamplePair;

struct ModelConfig {
  Variant variant = Variant::diff;
  Pooling pooling = Pooling::avg;
  std::size_t dim = 300;
  std::size_t hidden = 100;
  std::size_t joint_dim = 100;
  bool synthetic_first = false;

  bool operator==(const ModelConfig&) const = default;
};

/// Every trainable tensor of the matcher.
struct ModelParams {
  ModelConfig config;
  AttentionParams attention;
  LstmParams lstm;
  ClassifierParams classifier;

  ModelParams() = default;
  explicit ModelParams(const ModelConfig& cfg);

  // Fixed order: attention, LSTM gates, joint layer, output layer.
  std::vector<ParamTensor*> tensors();
  std::vector<const ParamTensor*> tensors() const;
  void zero_grad();
};

/// Glorot-uniform weights, zero biases, forget-gate bias 1. Deterministic in seed.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

struct EncodedPair {
  EmbeddedSequence original;
  EmbeddedSequence synthetic;
};

struct ForwardPass {
  AttentionResult attention;
  EncoderTrace encoder;
  ClassifierTrace classifier;
};

ForwardPass forward(const ModelParams& params, const EncodedPair& pair, std::span<const double> dropout_scales = {});

/// Runs forward and backward for one labelled pair, adding
/// scale * d(loss)/d(params) to the gradients. Returns the unscaled loss.
double accumulate_gradients(ModelParams& params, const EncodedPair& pair, int label,
                            const ClassWeights& class_weights, double scale,
                            std::span<const double> dropout_scales = {});

/// Token ids for both sides of one example, ready to embed.
struct PreparedExample {
  std::string id;
  TokenSequence original;
  TokenSequence synthetic;
  std::optional<int> label;
};

/// Resolves each synthetic headline (the record's own synthetic_headline
/// unless the source is file-backed, otherwise the source) and tokenizes.
std::vector<PreparedExample> prepare_examples(const std::vector<ExamplePair>& examples,
                                              const SyntheticHeadlineSource& source, const EmbeddingTable& table,
                                              std::size_t max_len);

std::string resolve_synthetic_headline(const ExamplePair& example, const SyntheticHeadlineSource& source);

EncodedPair embed_pair(const PreparedExample& example, const EmbeddingTable& table);

struct Prediction {
  std::string id;
  double p_incongruent = 0.0;
  double p_congruent = 0.0;
  int predicted = kCongruent;
};

std::vector<Prediction> predict(const ModelParams& params, const std::vector<PreparedExample>& examples,
                                const EmbeddingTable& table);

}  // namespace musem
