#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "musem/numeric.hpp"
#include "musem/text.hpp"

namespace musem {

// How a pair of word vectors (original q, synthetic r) is turned into a feature.
enum class Variant {
  diff,     // e_q - e_r
  dot,      // e_q * e_r elementwise
  concat,   // [e_q, e_r]
  clubbed,  // [e_q * e_r, e_q, e_r, e_q - e_r]
};

enum class Pooling { avg, max };

std::string_view to_string(Variant v);
std::string_view to_string(Pooling p);
Variant parse_variant(std::string_view name);
Pooling parse_pooling(std::string_view name);

std::size_t feature_width(Variant v, std::size_t dim);

/// Linear projection of a pair feature to a scalar score.
struct AttentionParams {
  Variant variant = Variant::diff;
  std::size_t dim = 0;
  ParamTensor weight;  // 1 x feature_width(variant, dim)
  ParamTensor bias;    // 1 x 1

  AttentionParams() = default;
  AttentionParams(Variant v, std::size_t d);

  // Slices of `weight` by role; empty when the variant lacks that slice.
  std::span<const double> product_weight() const;
  std::span<const double> original_weight() const;   // concat, applied to e_q
  std::span<const double> synthetic_weight() const;  // concat, applied to e_r
  std::span<const double> difference_weight() const;
};

Vec pair_feature(std::span<const double> original, std::span<const double> synthetic, Variant variant);

/// C[q][r] = weight . pair_feature(e_q, e_r) + bias over real positions.
/// Entries that touch padding are left at 0; callers must consult the masks.
Mat score_matrix(const EmbeddedSequence& original, const EmbeddedSequence& synthetic,
                 const AttentionParams& params);

struct AttentionWeights {
  Vec original;   // softmax of pooled rows
  Vec synthetic;  // softmax of pooled columns
  // Max pooling only: the winning column for each row, and row for each column.
  std::vector<std::size_t> row_argmax;
  std::vector<std::size_t> col_argmax;
};

AttentionWeights attention_weights(const Mat& scores, const Mask& original_mask, const Mask& synthetic_mask,
                                   Pooling pooling = Pooling::avg);

/// Weighted sum of the rows of `embeddings`.
Vec attended_representation(const Mat& embeddings, std::span<const double> weights);
Vec combine(std::span<const double> original_summary, std::span<const double> synthetic_summary);

struct AttentionResult {
  Mat scores;
  AttentionWeights weights;
  Vec original_summary;
  Vec synthetic_summary;
  Vec combined;
};

AttentionResult attend(const EmbeddedSequence& original, const EmbeddedSequence& synthetic,
                       const AttentionParams& params, Pooling pooling);

/// Accumulates d(loss)/d(weight, bias) into params given d(loss)/d(combined).
void attend_backward(const AttentionResult& result, const EmbeddedSequence& original,
                     const EmbeddedSequence& synthetic, std::span<const double> grad_combined,
                     Pooling pooling, AttentionParams& params);

}  // namespace musem
