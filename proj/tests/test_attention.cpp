#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "musem/attention.hpp"
#include "musem/error.hpp"
#include "oracles.hpp"

using namespace musem;
using testing::make_embedded;

namespace {

AttentionParams random_params(Variant v, std::size_t d, Rng& rng) {
  AttentionParams p(v, d);
  for (auto& w : p.weight.value.values) w = rng.uniform(-1, 1);
  p.bias.value(0, 0) = rng.uniform(-1, 1);
  return p;
}

int oracle_variant(Variant v) { return static_cast<int>(v); }

}  // namespace

TEST_SUITE("attention") {

TEST_CASE("pair_feature examples") {
  CHECK(pair_feature(Vec{1, 2}, Vec{1, 2}, Variant::diff) == Vec{0, 0});
  CHECK(pair_feature(Vec{1, 0}, Vec{0, 1}, Variant::dot) == Vec{0, 0});
  CHECK(pair_feature(Vec{1, 2}, Vec{3, 4}, Variant::concat) == Vec{1, 2, 3, 4});
  CHECK(pair_feature(Vec{1, 2}, Vec{3, 4}, Variant::clubbed) == Vec{3, 8, 1, 2, 3, 4, -2, -2});
  CHECK_THROWS_AS(pair_feature(Vec{1}, Vec{1, 2}, Variant::diff), ShapeError);
}

TEST_CASE("variant names and widths") {
  CHECK(parse_variant("clubbed") == Variant::clubbed);
  CHECK(parse_variant("dpc") == Variant::clubbed);
  CHECK_THROWS_AS(parse_variant("sum"), InputError);
  CHECK(parse_pooling("max") == Pooling::max);
  CHECK_THROWS_AS(parse_pooling("min"), InputError);
  CHECK(feature_width(Variant::diff, 3) == 3);
  CHECK(feature_width(Variant::dot, 3) == 3);
  CHECK(feature_width(Variant::concat, 3) == 6);
  CHECK(feature_width(Variant::clubbed, 3) == 12);
  CHECK(AttentionParams(Variant::clubbed, 3).weight.value.cols == 12);
}

TEST_CASE("score_matrix hand example") {
  AttentionParams p(Variant::diff, 2);
  p.weight.value.values = {1, -1};
  p.bias.value(0, 0) = 0.5;
  auto C = score_matrix(make_embedded({{0.3, 0.1}}), make_embedded({{0.2, 0.4}}), p);
  CHECK(C(0, 0) == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("identical headlines give the bias on the diagonal") {
  Rng rng(8);
  auto p = random_params(Variant::diff, 3, rng);
  auto rows = testing::random_rows(rng, 4, 3);
  auto C = score_matrix(make_embedded(rows), make_embedded(rows), p);
  for (std::size_t q = 0; q < 4; ++q) CHECK(C(q, q) == doctest::Approx(p.bias.value(0, 0)).epsilon(1e-15));
}

TEST_CASE("fully masked side is rejected") {
  AttentionParams p(Variant::diff, 2);
  auto masked = make_embedded({{1, 2}}, 1);
  masked.mask[0] = false;
  CHECK_THROWS_AS(score_matrix(masked, make_embedded({{1, 2}}), p), DomainError);
  CHECK_THROWS_AS(score_matrix(make_embedded({{1, 2}}), masked, p), DomainError);
  CHECK_THROWS_AS(score_matrix(make_embedded({{1, 2}}), make_embedded({{0, 0}}, 0), AttentionParams(Variant::diff, 3)),
                  ShapeError);
}

TEST_CASE("attention_weights examples") {
  Mat constant(3, 2, 0.7);
  auto w = attention_weights(constant, Mask{true, true, true}, Mask{true, true});
  for (double a : w.original) CHECK(a == doctest::Approx(1.0 / 3).epsilon(1e-15));

  Mat c(2, 1);
  c(0, 0) = 1;
  c(1, 0) = 2;
  auto w2 = attention_weights(c, Mask{true, true}, Mask{true});
  CHECK(w2.original[0] == doctest::Approx(0.26894).epsilon(1e-4));
  CHECK(w2.original[1] == doctest::Approx(0.73106).epsilon(1e-4));
  CHECK(w2.synthetic[0] == 1.0);

  // Masked column 99 must not enter the row mean of 1.5: rows [1,2,99] and [0,0,99].
  Mat m(2, 3);
  m(0, 0) = 1, m(0, 1) = 2, m(0, 2) = 99;
  auto w3 = attention_weights(m, Mask{true, true}, Mask{true, true, false});
  const double e = std::exp(1.5);
  CHECK(w3.original[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-14));
  CHECK(w3.synthetic[2] == 0.0);
}

TEST_CASE("attended representation and combine") {
  Mat rows(2, 2);
  rows(0, 0) = 1, rows(1, 1) = 1;
  CHECK(attended_representation(rows, Vec{0.5, 0.5}) == Vec{0.5, 0.5});
  Mat three(3, 2);
  three(0, 0) = 3, three(0, 1) = -4, three(1, 0) = 7;
  CHECK(attended_representation(three, Vec{1, 0, 0}) == Vec{3, -4});
  CHECK(combine(Vec{1, 2}, Vec{3, 4}) == Vec{4, 6});
  CHECK_THROWS_AS(attended_representation(three, Vec{1, 0}), ShapeError);
}

TEST_CASE("module matches the naive oracle with padding") {
  Rng rng(21);
  for (Variant v : {Variant::diff, Variant::dot, Variant::concat, Variant::clubbed}) {
    for (Pooling pool : {Pooling::avg, Pooling::max}) {
      for (int trial = 0; trial < 40; ++trial) {
        const std::size_t d = 1 + rng.below(3), l = 1 + rng.below(4), p = 1 + rng.below(4);
        auto params = random_params(v, d, rng);
        auto orig = testing::random_rows(rng, l, d), synth = testing::random_rows(rng, p, d);
        auto res = attend(make_embedded(orig, rng.below(3)), make_embedded(synth, rng.below(3)), params, pool);
        auto ref = oracle::attention(orig, synth, params.weight.value.values, params.bias.value(0, 0),
                                     oracle_variant(v), pool == Pooling::max);
        for (std::size_t q = 0; q < l; ++q) {
          CHECK(std::abs(res.weights.original[q] - ref.a_o[q]) <= 1e-12);
          for (std::size_t r = 0; r < p; ++r) CHECK(std::abs(res.scores(q, r) - ref.C[q][r]) <= 1e-12);
        }
        for (std::size_t r = 0; r < p; ++r) CHECK(std::abs(res.weights.synthetic[r] - ref.a_s[r]) <= 1e-12);
        for (std::size_t k = 0; k < d; ++k) CHECK(std::abs(res.combined[k] - ref.m_a[k]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("clubbed with zeroed slices reduces to diff exactly") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + rng.below(4);
    auto diff = random_params(Variant::diff, d, rng);
    AttentionParams club(Variant::clubbed, d);
    for (std::size_t k = 0; k < d; ++k) club.weight.value(0, 3 * d + k) = diff.weight.value(0, k);
    club.bias.value = diff.bias.value;
    auto o = make_embedded(testing::random_rows(rng, 1 + rng.below(5), d), rng.below(3));
    auto s = make_embedded(testing::random_rows(rng, 1 + rng.below(5), d), rng.below(3));
    auto a = attend(o, s, diff, Pooling::avg);
    auto b = attend(o, s, club, Pooling::avg);
    CHECK(a.scores == b.scores);
    CHECK(a.weights.original == b.weights.original);
    CHECK(a.weights.synthetic == b.weights.synthetic);
    CHECK(a.combined == b.combined);
  }
}

TEST_CASE("weight invariants: normalization, bias shift, convex hull") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.below(4);
    const Variant v = static_cast<Variant>(rng.below(4));
    const Pooling pool = rng.below(2) ? Pooling::max : Pooling::avg;
    auto params = random_params(v, d, rng);
    auto orig_rows = testing::random_rows(rng, 1 + rng.below(5), d);
    auto o = make_embedded(orig_rows, rng.below(3));
    auto s = make_embedded(testing::random_rows(rng, 1 + rng.below(5), d), rng.below(3));
    auto res = attend(o, s, params, pool);

    double so = 0.0, ss = 0.0;
    for (std::size_t q = 0; q < o.length(); ++q) {
      so += res.weights.original[q];
      if (!o.mask[q]) CHECK(res.weights.original[q] == 0.0);
    }
    for (std::size_t r = 0; r < s.length(); ++r) {
      ss += res.weights.synthetic[r];
      if (!s.mask[r]) CHECK(res.weights.synthetic[r] == 0.0);
    }
    CHECK(std::abs(so - 1.0) <= 1e-10);
    CHECK(std::abs(ss - 1.0) <= 1e-10);

    for (std::size_t k = 0; k < d; ++k) {
      double lo = orig_rows[0][k], hi = orig_rows[0][k];
      for (const auto& row : orig_rows) lo = std::min(lo, row[k]), hi = std::max(hi, row[k]);
      CHECK(res.original_summary[k] >= lo - 1e-12);
      CHECK(res.original_summary[k] <= hi + 1e-12);
      CHECK(res.combined[k] == res.original_summary[k] + res.synthetic_summary[k]);
    }

    auto shifted = params;
    const double c = rng.uniform(-5, 5);
    shifted.bias.value(0, 0) += c;
    auto res2 = attend(o, s, shifted, pool);
    for (std::size_t q = 0; q < o.length(); ++q) {
      CHECK(std::abs(res2.weights.original[q] - res.weights.original[q]) <= 1e-10);
      for (std::size_t r = 0; r < s.length(); ++r)
        if (o.mask[q] && s.mask[r]) CHECK(std::abs(res2.scores(q, r) - res.scores(q, r) - c) <= 1e-10);
    }
    for (std::size_t r = 0; r < s.length(); ++r)
      CHECK(std::abs(res2.weights.synthetic[r] - res.weights.synthetic[r]) <= 1e-10);
  }
}

TEST_CASE("attend_backward matches finite differences") {
  Rng rng(31);
  for (Variant v : {Variant::diff, Variant::dot, Variant::concat, Variant::clubbed}) {
    for (Pooling pool : {Pooling::avg, Pooling::max}) {
      const std::size_t d = 3;
      auto params = random_params(v, d, rng);
      auto o = make_embedded(testing::random_rows(rng, 3, d), 1);
      auto s = make_embedded(testing::random_rows(rng, 4, d), 2);
      const Vec g = testing::random_vec(rng, d);
      auto loss = [&] { return dot(attend(o, s, params, pool).combined, g); };
      params.weight.zero_grad();
      params.bias.zero_grad();
      attend_backward(attend(o, s, params, pool), o, s, g, pool, params);
      ParamTensor* tensors[] = {&params.weight, &params.bias};
      auto report = grad_check(loss, tensors, 1e-5, 1e-4);
      CHECK_MESSAGE(report.passed(), to_string(v), "/", to_string(pool), " ", report.max_rel_error());
    }
  }
}

}  // TEST_SUITE
