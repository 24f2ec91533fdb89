#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "musem/numeric.hpp"

namespace musem {

inline constexpr std::size_t kNumClasses = 2;
inline constexpr int kCongruent = 0;
inline constexpr int kIncongruent = 1;

using ClassWeights = std::array<double, kNumClasses>;

/// ReLU joint layer over [attended, encoded] followed by a two-way softmax.
struct ClassifierParams {
  std::size_t input_dim = 0;
  std::size_t joint_dim = 0;
  ParamTensor joint_weight;   // joint_dim x input_dim
  ParamTensor joint_bias;     // joint_dim x 1
  ParamTensor output_weight;  // 2 x joint_dim
  ParamTensor output_bias;    // 2 x 1

  ClassifierParams() = default;
  ClassifierParams(std::size_t input_size, std::size_t joint_size);
};

struct ClassifierTrace {
  Vec input;           // [attended, encoded]
  Vec pre_activation;
  Vec joint;           // after ReLU
  Vec dropout_scales;  // empty when dropout is off
  Vec dropped;         // joint after dropout
  Vec logits;
  Vec probs;
};

/// `dropout_scales` holds per-unit multipliers for the joint layer (see
/// dropout_scales()); pass an empty span at inference time.
ClassifierTrace classify(std::span<const double> attended, std::span<const double> encoded,
                         const ClassifierParams& params, std::span<const double> dropout_scales = {});

// argmax with ties going to the congruent class
int predicted_class(std::span<const double> probs);

/// class_weights[label] * -log softmax(logits)[label]
double weighted_nll(std::span<const double> logits, int label, const ClassWeights& class_weights);
// d(weighted_nll)/d(logits)
Vec weighted_nll_grad(std::span<const double> logits, int label, const ClassWeights& class_weights);

struct ClassifierInputGrads {
  Vec attended;
  Vec encoded;
};

ClassifierInputGrads classify_backward(const ClassifierTrace& trace, std::span<const double> grad_logits,
                                       std::size_t attended_dim, ClassifierParams& params);

}  // namespace musem
