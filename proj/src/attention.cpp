#include "musem/attention.hpp"

#include <algorithm>

#include "musem/error.hpp"

namespace musem {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Offsets (in units of dim) of each weight slice inside the projection.
struct Layout {
  std::size_t product = kNone;
  std::size_t original = kNone;
  std::size_t synthetic = kNone;
  std::size_t difference = kNone;
};

Layout layout_of(Variant v) {
  switch (v) {
    case Variant::diff:
      return {kNone, kNone, kNone, 0};
    case Variant::dot:
      return {0, kNone, kNone, kNone};
    case Variant::concat:
      return {kNone, 0, 1, kNone};
    case Variant::clubbed:
      return {0, 1, 2, 3};
  }
  return {};
}

template <typename T>
std::span<T> slice(std::span<T> all, std::size_t block, std::size_t dim) {
  if (block == kNone) return {};
  return all.subspan(block * dim, dim);
}

std::size_t real_count(const Mask& mask) { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true)); }

void check_inputs(const EmbeddedSequence& original, const EmbeddedSequence& synthetic, std::size_t dim) {
  if (original.rows.cols != dim || synthetic.rows.cols != dim) {
    throw ShapeError("attention expects embeddings of dimension " + std::to_string(dim));
  }
  if (original.mask.size() != original.rows.rows || synthetic.mask.size() != synthetic.rows.rows) {
    throw ShapeError("attention: mask length does not match sequence length");
  }
  if (real_count(original.mask) == 0) throw DomainError("attention: original headline has no real tokens");
  if (real_count(synthetic.mask) == 0) throw DomainError("attention: synthetic headline has no real tokens");
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::diff:
      return "diff";
    case Variant::dot:
      return "dot";
    case Variant::concat:
      return "concat";
    case Variant::clubbed:
      return "clubbed";
  }
  return "?";
}

std::string_view to_string(Pooling p) { return p == Pooling::avg ? "avg" : "max"; }

Variant parse_variant(std::string_view name) {
  for (auto v : {Variant::diff, Variant::dot, Variant::concat, Variant::clubbed}) {
    if (name == to_string(v)) return v;
  }
  if (name == "dpc") return Variant::clubbed;
  throw InputError("unknown attention variant '" + std::string(name) + "'");
}

Pooling parse_pooling(std::string_view name) {
  if (name == "avg") return Pooling::avg;
  if (name == "max") return Pooling::max;
  throw InputError("unknown pooling '" + std::string(name) + "'");
}

std::size_t feature_width(Variant v, std::size_t dim) {
  switch (v) {
    case Variant::diff:
    case Variant::dot:
      return dim;
    case Variant::concat:
      return 2 * dim;
    case Variant::clubbed:
      return 4 * dim;
  }
  return 0;
}

AttentionParams::AttentionParams(Variant v, std::size_t d)
    : variant(v), dim(d), weight("attention.weight", 1, feature_width(v, d)), bias("attention.bias", 1, 1) {}

std::span<const double> AttentionParams::product_weight() const {
  return slice(std::span<const double>(weight.value.values), layout_of(variant).product, dim);
}
std::span<const double> AttentionParams::original_weight() const {
  return slice(std::span<const double>(weight.value.values), layout_of(variant).original, dim);
}
std::span<const double> AttentionParams::synthetic_weight() const {
  return slice(std::span<const double>(weight.value.values), layout_of(variant).synthetic, dim);
}
std::span<const double> AttentionParams::difference_weight() const {
  return slice(std::span<const double>(weight.value.values), layout_of(variant).difference, dim);
}

Vec pair_feature(std::span<const double> original, std::span<const double> synthetic, Variant variant) {
  if (original.size() != synthetic.size()) throw ShapeError("pair_feature: embedding dimensions differ");
  const std::size_t d = original.size();
  Vec product(d);
  Vec difference(d);
  for (std::size_t i = 0; i < d; ++i) {
    product[i] = original[i] * synthetic[i];
    difference[i] = original[i] - synthetic[i];
  }
  switch (variant) {
    case Variant::diff:
      return difference;
    case Variant::dot:
      return product;
    case Variant::concat:
      return concat(original, synthetic);
    case Variant::clubbed: {
      Vec out = concat(product, concat(original, synthetic));
      out.insert(out.end(), difference.begin(), difference.end());
      return out;
    }
  }
  return {};
}

// The projection of a pair feature splits into a term that depends only on
// q, one that depends only on r, and the elementwise-product term:
//   C[q][r] = (row[q] + col[r]) + sum_i w_prod[i] e_q[i] e_r[i] + b
Mat score_matrix(const EmbeddedSequence& original, const EmbeddedSequence& synthetic,
                 const AttentionParams& params) {
  check_inputs(original, synthetic, params.dim);
  if (params.weight.value.size() != feature_width(params.variant, params.dim)) {
    throw ShapeError("attention.weight has the wrong width for variant " + std::string(to_string(params.variant)));
  }
  const auto w_prod = params.product_weight();
  const auto w_orig = params.original_weight();
  const auto w_synth = params.synthetic_weight();
  const auto w_diff = params.difference_weight();
  const double b = params.bias.value.values[0];

  const std::size_t l = original.length();
  const std::size_t p = synthetic.length();
  Vec row_term(l, 0.0);
  Vec col_term(p, 0.0);
  for (std::size_t q = 0; q < l; ++q) {
    if (!original.mask[q]) continue;
    const auto e = original.rows.row(q);
    if (!w_diff.empty()) row_term[q] = dot(w_diff, e);
    if (!w_orig.empty()) row_term[q] += dot(w_orig, e);
  }
  for (std::size_t r = 0; r < p; ++r) {
    if (!synthetic.mask[r]) continue;
    const auto e = synthetic.rows.row(r);
    if (!w_synth.empty()) col_term[r] = dot(w_synth, e);
    if (!w_diff.empty()) col_term[r] -= dot(w_diff, e);
  }

  Mat scores(l, p);
  for (std::size_t q = 0; q < l; ++q) {
    if (!original.mask[q]) continue;
    const auto eq = original.rows.row(q);
    for (std::size_t r = 0; r < p; ++r) {
      if (!synthetic.mask[r]) continue;
      double c = row_term[q] + col_term[r];
      if (!w_prod.empty()) {
        const auto er = synthetic.rows.row(r);
        double s = 0.0;
        for (std::size_t i = 0; i < params.dim; ++i) s += w_prod[i] * eq[i] * er[i];
        c += s;
      }
      scores(q, r) = c + b;
    }
  }
  return scores;
}

AttentionWeights attention_weights(const Mat& scores, const Mask& original_mask, const Mask& synthetic_mask,
                                   Pooling pooling) {
  const std::size_t l = scores.rows;
  const std::size_t p = scores.cols;
  if (original_mask.size() != l || synthetic_mask.size() != p) {
    throw ShapeError("attention_weights: mask sizes do not match the score matrix");
  }
  const std::size_t n_orig = real_count(original_mask);
  const std::size_t n_synth = real_count(synthetic_mask);
  if (n_orig == 0 || n_synth == 0) throw DomainError("empty softmax support");

  AttentionWeights out;
  Vec row_pool(l, 0.0);
  Vec col_pool(p, 0.0);
  if (pooling == Pooling::avg) {
    for (std::size_t q = 0; q < l; ++q) {
      if (!original_mask[q]) continue;
      for (std::size_t r = 0; r < p; ++r) {
        if (!synthetic_mask[r]) continue;
        row_pool[q] += scores(q, r);
        col_pool[r] += scores(q, r);
      }
    }
    for (auto& v : row_pool) v /= static_cast<double>(n_synth);
    for (auto& v : col_pool) v /= static_cast<double>(n_orig);
  } else {
    out.row_argmax.assign(l, 0);
    out.col_argmax.assign(p, 0);
    std::vector<bool> col_seen(p, false);
    for (std::size_t q = 0; q < l; ++q) {
      if (!original_mask[q]) continue;
      bool row_seen = false;
      for (std::size_t r = 0; r < p; ++r) {
        if (!synthetic_mask[r]) continue;
        const double c = scores(q, r);
        if (!row_seen || c > row_pool[q]) {
          row_pool[q] = c;
          out.row_argmax[q] = r;
          row_seen = true;
        }
        if (!col_seen[r] || c > col_pool[r]) {
          col_pool[r] = c;
          out.col_argmax[r] = q;
          col_seen[r] = true;
        }
      }
    }
  }
  out.original = softmax(row_pool, original_mask);
  out.synthetic = softmax(col_pool, synthetic_mask);
  return out;
}

Vec attended_representation(const Mat& embeddings, std::span<const double> weights) {
  if (weights.size() != embeddings.rows) {
    throw ShapeError("attended_representation: " + std::to_string(weights.size()) + " weights for " +
                     std::to_string(embeddings.rows) + " rows");
  }
  Vec out(embeddings.cols, 0.0);
  for (std::size_t i = 0; i < embeddings.rows; ++i) {
    if (weights[i] != 0.0) axpy(weights[i], embeddings.row(i), out);
  }
  return out;
}

Vec combine(std::span<const double> original_summary, std::span<const double> synthetic_summary) {
  return add(original_summary, synthetic_summary);
}

AttentionResult attend(const EmbeddedSequence& original, const EmbeddedSequence& synthetic,
                       const AttentionParams& params, Pooling pooling) {
  AttentionResult result;
  result.scores = score_matrix(original, synthetic, params);
  result.weights = attention_weights(result.scores, original.mask, synthetic.mask, pooling);
  result.original_summary = attended_representation(original.rows, result.weights.original);
  result.synthetic_summary = attended_representation(synthetic.rows, result.weights.synthetic);
  result.combined = combine(result.original_summary, result.synthetic_summary);
  return result;
}

void attend_backward(const AttentionResult& result, const EmbeddedSequence& original,
                     const EmbeddedSequence& synthetic, std::span<const double> grad_combined,
                     Pooling pooling, AttentionParams& params) {
  const std::size_t l = original.length();
  const std::size_t p = synthetic.length();
  const std::size_t d = params.dim;
  if (grad_combined.size() != d) throw ShapeError("attend_backward: gradient has the wrong dimension");

  // Both summaries feed the combined vector with unit weight.
  Vec grad_orig_w(l, 0.0);
  Vec grad_synth_w(p, 0.0);
  for (std::size_t q = 0; q < l; ++q) {
    if (original.mask[q]) grad_orig_w[q] = dot(grad_combined, original.rows.row(q));
  }
  for (std::size_t r = 0; r < p; ++r) {
    if (synthetic.mask[r]) grad_synth_w[r] = dot(grad_combined, synthetic.rows.row(r));
  }
  const Vec grad_row_pool = softmax_backward(result.weights.original, grad_orig_w);
  const Vec grad_col_pool = softmax_backward(result.weights.synthetic, grad_synth_w);

  Mat grad_scores(l, p);
  if (pooling == Pooling::avg) {
    const double n_orig = static_cast<double>(real_count(original.mask));
    const double n_synth = static_cast<double>(real_count(synthetic.mask));
    for (std::size_t q = 0; q < l; ++q) {
      if (!original.mask[q]) continue;
      for (std::size_t r = 0; r < p; ++r) {
        if (synthetic.mask[r]) grad_scores(q, r) = grad_row_pool[q] / n_synth + grad_col_pool[r] / n_orig;
      }
    }
  } else {
    for (std::size_t q = 0; q < l; ++q) {
      if (original.mask[q]) grad_scores(q, result.weights.row_argmax[q]) += grad_row_pool[q];
    }
    for (std::size_t r = 0; r < p; ++r) {
      if (synthetic.mask[r]) grad_scores(result.weights.col_argmax[r], r) += grad_col_pool[r];
    }
  }

  Vec row_sum(l, 0.0);
  Vec col_sum(p, 0.0);
  double total = 0.0;
  for (std::size_t q = 0; q < l; ++q) {
    for (std::size_t r = 0; r < p; ++r) {
      row_sum[q] += grad_scores(q, r);
      col_sum[r] += grad_scores(q, r);
      total += grad_scores(q, r);
    }
  }
  params.bias.grad.values[0] += total;

  const Layout layout = layout_of(params.variant);
  std::span<double> grad_all(params.weight.grad.values);
  auto g_prod = slice(grad_all, layout.product, d);
  auto g_orig = slice(grad_all, layout.original, d);
  auto g_synth = slice(grad_all, layout.synthetic, d);
  auto g_diff = slice(grad_all, layout.difference, d);

  for (std::size_t q = 0; q < l; ++q) {
    if (!original.mask[q]) continue;
    const auto e = original.rows.row(q);
    if (!g_orig.empty()) axpy(row_sum[q], e, g_orig);
    if (!g_diff.empty()) axpy(row_sum[q], e, g_diff);
  }
  for (std::size_t r = 0; r < p; ++r) {
    if (!synthetic.mask[r]) continue;
    const auto e = synthetic.rows.row(r);
    if (!g_synth.empty()) axpy(col_sum[r], e, g_synth);
    if (!g_diff.empty()) axpy(-col_sum[r], e, g_diff);
  }
  if (!g_prod.empty()) {
    for (std::size_t q = 0; q < l; ++q) {
      if (!original.mask[q]) continue;
      const auto eq = original.rows.row(q);
      for (std::size_t r = 0; r < p; ++r) {
        const double g = grad_scores(q, r);
        if (g == 0.0) continue;
        const auto er = synthetic.rows.row(r);
        for (std::size_t i = 0; i < d; ++i) g_prod[i] += g * eq[i] * er[i];
      }
    }
  }
}

}  // namespace musem
