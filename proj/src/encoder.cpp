#include "musem/encoder.hpp"

#include <cmath>

#include "musem/error.hpp"

namespace musem {

LstmParams::LstmParams(std::size_t hidden_size, std::size_t input_dim)
    : hidden(hidden_size),
      dim(input_dim),
      forget_weight("lstm.forget.weight", hidden_size, hidden_size + input_dim),
      input_weight("lstm.input.weight", hidden_size, hidden_size + input_dim),
      candidate_weight("lstm.candidate.weight", hidden_size, hidden_size + input_dim),
      output_weight("lstm.output.weight", hidden_size, hidden_size + input_dim),
      forget_bias("lstm.forget.bias", hidden_size, 1),
      input_bias("lstm.input.bias", hidden_size, 1),
      candidate_bias("lstm.candidate.bias", hidden_size, 1),
      output_bias("lstm.output.bias", hidden_size, 1) {}

LstmState lstm_step(const LstmState& state, std::span<const double> x, const LstmParams& params,
                    LstmStepTrace* trace) {
  if (x.size() != params.dim) throw ShapeError("lstm_step: input has the wrong dimension");
  if (state.h.size() != params.hidden || state.c.size() != params.hidden) {
    throw ShapeError("lstm_step: state has the wrong size");
  }
  const Vec input = concat(state.h, x);

  auto gate = [&](const ParamTensor& w, const ParamTensor& b) {
    Vec z = matvec(w.value, input);
    axpy(1.0, b.value.values, z);
    return z;
  };
  const Vec f = sigmoid(gate(params.forget_weight, params.forget_bias));
  const Vec i = sigmoid(gate(params.input_weight, params.input_bias));
  const Vec g = tanh(gate(params.candidate_weight, params.candidate_bias));
  const Vec o = sigmoid(gate(params.output_weight, params.output_bias));

  LstmState next = LstmState::zeros(params.hidden);
  for (std::size_t k = 0; k < params.hidden; ++k) next.c[k] = f[k] * state.c[k] + i[k] * g[k];
  const Vec tanh_c = tanh(next.c);
  for (std::size_t k = 0; k < params.hidden; ++k) next.h[k] = o[k] * tanh_c[k];

  if (trace != nullptr) *trace = {input, f, i, g, o, state.c, tanh_c};
  return next;
}

EncoderTrace encode_traced(const EmbeddedSequence& original, const EmbeddedSequence& synthetic,
                           const LstmParams& params, bool synthetic_first) {
  EncoderTrace trace;
  trace.final_state = LstmState::zeros(params.hidden);
  const EmbeddedSequence& first = synthetic_first ? synthetic : original;
  const EmbeddedSequence& second = synthetic_first ? original : synthetic;
  for (const EmbeddedSequence* seq : {&first, &second}) {
    for (std::size_t t = 0; t < seq->length(); ++t) {
      if (!seq->mask[t]) continue;
      LstmStepTrace step;
      trace.final_state = lstm_step(trace.final_state, seq->rows.row(t), params, &step);
      trace.steps.push_back(std::move(step));
    }
  }
  if (trace.steps.empty()) throw DomainError("encode: no real tokens in either headline");
  return trace;
}

Vec encode(const EmbeddedSequence& original, const EmbeddedSequence& synthetic, const LstmParams& params,
           bool synthetic_first) {
  return encode_traced(original, synthetic, params, synthetic_first).final_state.h;
}

void encode_backward(const EncoderTrace& trace, std::span<const double> grad_output, LstmParams& params) {
  const std::size_t n = params.hidden;
  if (grad_output.size() != n) throw ShapeError("encode_backward: gradient has the wrong size");
  Vec dh(grad_output.begin(), grad_output.end());
  Vec dc(n, 0.0);
  Vec dz_f(n), dz_i(n), dz_g(n), dz_o(n);

  for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
    const LstmStepTrace& s = *it;
    for (std::size_t k = 0; k < n; ++k) {
      const double d_out = dh[k] * s.tanh_c[k];
      dc[k] += dh[k] * s.out[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
      const double d_forget = dc[k] * s.c_prev[k];
      const double d_in = dc[k] * s.candidate[k];
      const double d_cand = dc[k] * s.in[k];
      dz_f[k] = d_forget * s.forget[k] * (1.0 - s.forget[k]);
      dz_i[k] = d_in * s.in[k] * (1.0 - s.in[k]);
      dz_g[k] = d_cand * (1.0 - s.candidate[k] * s.candidate[k]);
      dz_o[k] = d_out * s.out[k] * (1.0 - s.out[k]);
      dc[k] *= s.forget[k];
    }
    add_outer(params.forget_weight.grad, dz_f, s.input);
    add_outer(params.input_weight.grad, dz_i, s.input);
    add_outer(params.candidate_weight.grad, dz_g, s.input);
    add_outer(params.output_weight.grad, dz_o, s.input);
    axpy(1.0, dz_f, params.forget_bias.grad.values);
    axpy(1.0, dz_i, params.input_bias.grad.values);
    axpy(1.0, dz_g, params.candidate_bias.grad.values);
    axpy(1.0, dz_o, params.output_bias.grad.values);

    Vec d_input = matvec_transposed(params.forget_weight.value, dz_f);
    axpy(1.0, matvec_transposed(params.input_weight.value, dz_i), d_input);
    axpy(1.0, matvec_transposed(params.candidate_weight.value, dz_g), d_input);
    axpy(1.0, matvec_transposed(params.output_weight.value, dz_o), d_input);
    dh.assign(d_input.begin(), d_input.begin() + static_cast<std::ptrdiff_t>(n));
  }
}

}  // namespace musem
