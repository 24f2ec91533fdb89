#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "musem/model.hpp"

namespace musem {

struct ModelGradCheckOptions {
  ModelConfig model{Variant::diff, Pooling::avg, 6, 4, 4, false};
  std::size_t max_len = 5;
  std::size_t batch = 2;
  std::uint64_t seed = 7;
  double step = 1e-5;
  double tolerance = 1e-4;
  double dropout = 0.2;  // a fixed mask is drawn once per example
  // Test hook: when set, the analytic gradient of this tensor is perturbed
  // before comparison, which must make the check fail.
  std::string corrupt_tensor;
};

/// Builds a random batch (random embeddings, lengths 1..max_len with
/// padding, random labels and class weights), computes the mean weighted
/// loss gradient analytically and compares it with central differences.
GradCheckReport check_model_gradients(const ModelGradCheckOptions& options);

}  // namespace musem
