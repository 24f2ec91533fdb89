#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "musem/numeric.hpp"
#include "musem/text.hpp"

namespace musem {

/// Gate weights act on the concatenation [h_prev, x].
struct LstmParams {
  std::size_t hidden = 0;
  std::size_t dim = 0;
  ParamTensor forget_weight;     // hidden x (hidden + dim)
  ParamTensor input_weight;
  ParamTensor candidate_weight;
  ParamTensor output_weight;
  ParamTensor forget_bias;       // hidden x 1
  ParamTensor input_bias;
  ParamTensor candidate_bias;
  ParamTensor output_bias;

  LstmParams() = default;
  LstmParams(std::size_t hidden_size, std::size_t input_dim);
};

struct LstmState {
  Vec h;
  Vec c;

  static LstmState zeros(std::size_t hidden) { return {Vec(hidden, 0.0), Vec(hidden, 0.0)}; }
};

// Intermediates of one step, kept for the backward pass.
struct LstmStepTrace {
  Vec input;  // [h_prev, x]
  Vec forget;
  Vec in;
  Vec candidate;
  Vec out;
  Vec c_prev;
  Vec tanh_c;
};

LstmState lstm_step(const LstmState& state, std::span<const double> x, const LstmParams& params,
                    LstmStepTrace* trace = nullptr);

struct EncoderTrace {
  std::vector<LstmStepTrace> steps;
  LstmState final_state;
};

/// Runs the LSTM over the real tokens of the original headline followed by
/// the real tokens of the synthetic one (reversed order when
/// synthetic_first). Padding is skipped. Returns the last hidden state.
Vec encode(const EmbeddedSequence& original, const EmbeddedSequence& synthetic, const LstmParams& params,
           bool synthetic_first = false);
EncoderTrace encode_traced(const EmbeddedSequence& original, const EmbeddedSequence& synthetic,
                           const LstmParams& params, bool synthetic_first = false);

/// Backpropagation through time; accumulates into the params' gradients.
void encode_backward(const EncoderTrace& trace, std::span<const double> grad_output, LstmParams& params);

}  // namespace musem
