#include "musem/classifier.hpp"

#include <cmath>

#include "musem/error.hpp"

namespace musem {

namespace {

// log(1 + e^x) without overflow or cancellation.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_label(int label) {
  if (label != kCongruent && label != kIncongruent) throw InputError("label must be 0 or 1");
}

}  // namespace

ClassifierParams::ClassifierParams(std::size_t input_size, std::size_t joint_size)
    : input_dim(input_size),
      joint_dim(joint_size),
      joint_weight("joint.weight", joint_size, input_size),
      joint_bias("joint.bias", joint_size, 1),
      output_weight("output.weight", kNumClasses, joint_size),
      output_bias("output.bias", kNumClasses, 1) {}

ClassifierTrace classify(std::span<const double> attended, std::span<const double> encoded,
                         const ClassifierParams& params, std::span<const double> dropout_scales) {
  ClassifierTrace t;
  t.input = concat(attended, encoded);
  if (t.input.size() != params.input_dim) {
    throw ShapeError("classify: joint input has size " + std::to_string(t.input.size()) + ", expected " +
                     std::to_string(params.input_dim));
  }
  t.pre_activation = matvec(params.joint_weight.value, t.input);
  axpy(1.0, params.joint_bias.value.values, t.pre_activation);
  t.joint = relu(t.pre_activation);
  t.dropped = t.joint;
  if (!dropout_scales.empty()) {
    if (dropout_scales.size() != params.joint_dim) throw ShapeError("classify: dropout mask has the wrong size");
    t.dropout_scales.assign(dropout_scales.begin(), dropout_scales.end());
    for (std::size_t k = 0; k < t.dropped.size(); ++k) t.dropped[k] *= dropout_scales[k];
  }
  t.logits = matvec(params.output_weight.value, t.dropped);
  axpy(1.0, params.output_bias.value.values, t.logits);
  t.probs = softmax(t.logits);
  return t;
}

int predicted_class(std::span<const double> probs) {
  if (probs.size() != kNumClasses) throw ShapeError("predicted_class expects two probabilities");
  return probs[kIncongruent] > probs[kCongruent] ? kIncongruent : kCongruent;
}

double weighted_nll(std::span<const double> logits, int label, const ClassWeights& class_weights) {
  if (logits.size() != kNumClasses) throw ShapeError("weighted_nll expects two logits");
  check_label(label);
  const double margin = logits[1 - label] - logits[label];
  return class_weights[label] * softplus(margin);
}

Vec weighted_nll_grad(std::span<const double> logits, int label, const ClassWeights& class_weights) {
  if (logits.size() != kNumClasses) throw ShapeError("weighted_nll_grad expects two logits");
  check_label(label);
  Vec grad = softmax(logits);
  grad[label] -= 1.0;
  for (auto& g : grad) g *= class_weights[label];
  return grad;
}

ClassifierInputGrads classify_backward(const ClassifierTrace& trace, std::span<const double> grad_logits,
                                       std::size_t attended_dim, ClassifierParams& params) {
  if (grad_logits.size() != kNumClasses) throw ShapeError("classify_backward expects two logit gradients");
  add_outer(params.output_weight.grad, grad_logits, trace.dropped);
  axpy(1.0, grad_logits, params.output_bias.grad.values);

  Vec grad_pre = matvec_transposed(params.output_weight.value, grad_logits);
  for (std::size_t k = 0; k < grad_pre.size(); ++k) {
    if (!trace.dropout_scales.empty()) grad_pre[k] *= trace.dropout_scales[k];
    if (trace.pre_activation[k] <= 0.0) grad_pre[k] = 0.0;
  }
  add_outer(params.joint_weight.grad, grad_pre, trace.input);
  axpy(1.0, grad_pre, params.joint_bias.grad.values);

  const Vec grad_input = matvec_transposed(params.joint_weight.value, grad_pre);
  const auto split = static_cast<std::ptrdiff_t>(attended_dim);
  return {Vec(grad_input.begin(), grad_input.begin() + split), Vec(grad_input.begin() + split, grad_input.end())};
}

}  // namespace musem
