#include "musem/model.hpp"

#include <cmath>

#include "musem/data.hpp"
#include "musem/error.hpp"

namespace musem {

ModelParams::ModelParams(const ModelConfig& cfg)
    : config(cfg),
      attention(cfg.variant, cfg.dim),
      lstm(cfg.hidden, cfg.dim),
      classifier(cfg.dim + cfg.hidden, cfg.joint_dim) {
  if (cfg.dim == 0 || cfg.hidden == 0 || cfg.joint_dim == 0) {
    throw InputError("model sizes must be positive (dim, hidden, joint_dim)");
  }
}

std::vector<ParamTensor*> ModelParams::tensors() {
  return {&attention.weight,        &attention.bias,           &lstm.forget_weight,  &lstm.input_weight,
          &lstm.candidate_weight,   &lstm.output_weight,       &lstm.forget_bias,    &lstm.input_bias,
          &lstm.candidate_bias,     &lstm.output_bias,         &classifier.joint_weight,
          &classifier.joint_bias,   &classifier.output_weight, &classifier.output_bias};
}

std::vector<const ParamTensor*> ModelParams::tensors() const {
  auto mut = const_cast<ModelParams*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

void ModelParams::zero_grad() {
  for (auto* t : tensors()) t->zero_grad();
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  ModelParams params(config);
  Rng rng(seed);
  auto glorot = [&](ParamTensor& t, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : t.value.values) v = rng.uniform(-limit, limit);
  };
  const std::size_t gate_in = config.hidden + config.dim;
  glorot(params.attention.weight, params.attention.weight.value.cols, 1);
  for (ParamTensor* w : {&params.lstm.forget_weight, &params.lstm.input_weight, &params.lstm.candidate_weight,
                         &params.lstm.output_weight}) {
    glorot(*w, gate_in, config.hidden);
  }
  params.lstm.forget_bias.value.fill(1.0);
  glorot(params.classifier.joint_weight, config.dim + config.hidden, config.joint_dim);
  glorot(params.classifier.output_weight, config.joint_dim, kNumClasses);
  return params;
}

ForwardPass forward(const ModelParams& params, const EncodedPair& pair, std::span<const double> dropout_scales) {
  ForwardPass pass;
  pass.attention = attend(pair.original, pair.synthetic, params.attention, params.config.pooling);
  pass.encoder = encode_traced(pair.original, pair.synthetic, params.lstm, params.config.synthetic_first);
  pass.classifier =
      classify(pass.attention.combined, pass.encoder.final_state.h, params.classifier, dropout_scales);
  return pass;
}

double accumulate_gradients(ModelParams& params, const EncodedPair& pair, int label,
                            const ClassWeights& class_weights, double scale,
                            std::span<const double> dropout_scales) {
  const ForwardPass pass = forward(params, pair, dropout_scales);
  const double loss = weighted_nll(pass.classifier.logits, label, class_weights);
  Vec grad_logits = weighted_nll_grad(pass.classifier.logits, label, class_weights);
  for (auto& g : grad_logits) g *= scale;

  const auto grads = classify_backward(pass.classifier, grad_logits, params.config.dim, params.classifier);
  attend_backward(pass.attention, pair.original, pair.synthetic, grads.attended, params.config.pooling,
                  params.attention);
  encode_backward(pass.encoder, grads.encoded, params.lstm);
  return loss;
}

std::string resolve_synthetic_headline(const ExamplePair& example, const SyntheticHeadlineSource& source) {
  if (source.kind() == SyntheticHeadlineSource::Kind::lead_k && example.synthetic_headline) {
    return *example.synthetic_headline;
  }
  return source.provide(example.id, example.body);
}

std::vector<PreparedExample> prepare_examples(const std::vector<ExamplePair>& examples,
                                              const SyntheticHeadlineSource& source, const EmbeddingTable& table,
                                              std::size_t max_len) {
  std::vector<PreparedExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    PreparedExample p;
    p.id = ex.id;
    p.original = make_sequence(ex.headline, table, max_len);
    p.synthetic = make_sequence(resolve_synthetic_headline(ex, source), table, max_len);
    if (p.original.declared_length == 0 || p.synthetic.declared_length == 0) {
      throw InputError("example " + ex.id + ": headline or synthetic headline has no tokens");
    }
    p.label = ex.label;
    out.push_back(std::move(p));
  }
  return out;
}

EncodedPair embed_pair(const PreparedExample& example, const EmbeddingTable& table) {
  return {embed_sequence(example.original, table), embed_sequence(example.synthetic, table)};
}

std::vector<Prediction> predict(const ModelParams& params, const std::vector<PreparedExample>& examples,
                                const EmbeddingTable& table) {
  if (table.dim() != params.config.dim) {
    throw ShapeError("embedding dimension " + std::to_string(table.dim()) + " does not match model dimension " +
                     std::to_string(params.config.dim));
  }
  std::vector<Prediction> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    const auto pass = forward(params, embed_pair(ex, table));
    out.push_back({ex.id, pass.classifier.probs[kIncongruent], pass.classifier.probs[kCongruent],
                   predicted_class(pass.classifier.probs)});
  }
  return out;
}

}  // namespace musem
