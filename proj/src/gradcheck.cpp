#include "musem/gradcheck.hpp"

#include "musem/error.hpp"

namespace musem {

namespace {

EmbeddedSequence random_sequence(Rng& rng, std::size_t max_len, std::size_t dim) {
  const std::size_t length = 1 + rng.below(max_len);
  EmbeddedSequence seq{Mat(max_len, dim), Mask(max_len, false)};
  for (std::size_t t = 0; t < length; ++t) {
    seq.mask[t] = true;
    for (auto& v : seq.rows.row(t)) v = rng.uniform(-1.0, 1.0);
  }
  return seq;
}

}  // namespace

GradCheckReport check_model_gradients(const ModelGradCheckOptions& options) {
  if (options.batch == 0 || options.max_len == 0) throw InputError("gradcheck needs a non-empty batch");
  ModelParams params = init_params(options.model, options.seed);
  Rng rng(options.seed ^ 0x5bd1e995ULL);
  // Non-zero biases so every bias path carries signal.
  for (ParamTensor* t : params.tensors()) {
    if (t->value.cols == 1) {
      for (auto& v : t->value.values) v += rng.uniform(-0.5, 0.5);
    }
  }

  std::vector<EncodedPair> batch;
  std::vector<int> labels;
  std::vector<Vec> masks;
  for (std::size_t i = 0; i < options.batch; ++i) {
    EncodedPair pair{random_sequence(rng, options.max_len, options.model.dim),
                     random_sequence(rng, options.max_len, options.model.dim)};
    batch.push_back(std::move(pair));
    labels.push_back(static_cast<int>(rng.below(2)));
    masks.push_back(options.dropout > 0.0 ? dropout_scales(options.model.joint_dim, options.dropout, rng) : Vec{});
  }
  const ClassWeights weights{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
  const double scale = 1.0 / static_cast<double>(batch.size());

  params.zero_grad();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    accumulate_gradients(params, batch[i], labels[i], weights, scale, masks[i]);
  }
  if (!options.corrupt_tensor.empty()) {
    bool found = false;
    for (ParamTensor* t : params.tensors()) {
      if (t->name == options.corrupt_tensor) {
        t->grad.values[0] += 1.0;
        found = true;
      }
    }
    if (!found) throw InputError("no tensor named " + options.corrupt_tensor);
  }

  auto loss = [&] {
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto pass = forward(params, batch[i], masks[i]);
      total += weighted_nll(pass.classifier.logits, labels[i], weights);
    }
    return total * scale;
  };
  const auto tensors = params.tensors();
  return grad_check(loss, tensors, options.step, options.tolerance);
}

}  // namespace musem
