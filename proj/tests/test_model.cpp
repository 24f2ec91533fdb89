#include <doctest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "musem/error.hpp"
#include "musem/gradcheck.hpp"
#include "musem/model.hpp"

using namespace musem;

TEST_SUITE("model") {

TEST_CASE("init is deterministic and follows the stated rules") {
  ModelConfig cfg{Variant::clubbed, Pooling::avg, 5, 4, 3, false};
  auto a = init_params(cfg, 99);
  auto b = init_params(cfg, 99);
  auto c = init_params(cfg, 100);
  auto ta = a.tensors(), tb = b.tensors(), tc = c.tensors();
  REQUIRE(ta.size() == 14);
  bool any_diff = false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta[i]->value == tb[i]->value);
    any_diff = any_diff || !(ta[i]->value == tc[i]->value);
    CHECK(ta[i]->grad.same_shape(ta[i]->value));
  }
  CHECK(any_diff);
  for (double v : a.lstm.forget_bias.value.values) CHECK(v == 1.0);
  for (const auto* t : {&a.lstm.input_bias, &a.lstm.candidate_bias, &a.lstm.output_bias, &a.classifier.joint_bias,
                        &a.classifier.output_bias, &a.attention.bias})
    for (double v : t->value.values) CHECK(v == 0.0);
  const double limit = std::sqrt(6.0 / (4 + 5 + 4));
  for (double v : a.lstm.input_weight.value.values) CHECK(std::abs(v) <= limit);
  CHECK(a.attention.weight.value.cols == 20);
  CHECK(a.classifier.joint_weight.value.rows == 3);
  CHECK(a.classifier.joint_weight.value.cols == 9);
}

TEST_CASE("tensor names are unique") {
  ModelParams p(ModelConfig{Variant::diff, Pooling::avg, 2, 2, 2, false});
  std::set<std::string> names;
  for (const auto* t : p.tensors()) names.insert(t->name);
  CHECK(names.size() == 14);
  CHECK(names.count("attention.weight") == 1);
  CHECK(names.count("lstm.forget.bias") == 1);
}

TEST_CASE("zero sizes are rejected") {
  CHECK_THROWS_AS(init_params(ModelConfig{Variant::diff, Pooling::avg, 0, 4, 4, false}, 1), InputError);
  CHECK_THROWS_AS(init_params(ModelConfig{Variant::diff, Pooling::avg, 4, 0, 4, false}, 1), InputError);
  CHECK_THROWS_AS(init_params(ModelConfig{Variant::diff, Pooling::avg, 4, 4, 0, false}, 1), InputError);
}

TEST_CASE("full model gradients match finite differences") {
  for (Variant v : {Variant::diff, Variant::dot, Variant::concat, Variant::clubbed}) {
    for (Pooling pool : {Pooling::avg, Pooling::max}) {
      ModelGradCheckOptions opt;
      opt.model = {v, pool, 4, 3, 3, false};
      auto report = check_model_gradients(opt);
      CHECK_MESSAGE(report.passed(), to_string(v), "/", to_string(pool), " ", report.max_rel_error());
      CHECK(report.entries.size() == 14);
    }
  }
  ModelGradCheckOptions flipped;
  flipped.model.synthetic_first = true;
  flipped.dropout = 0.0;
  CHECK(check_model_gradients(flipped).passed());
}

TEST_CASE("a corrupted gradient is caught and named") {
  ModelGradCheckOptions opt;
  opt.corrupt_tensor = "lstm.output.weight";
  auto report = check_model_gradients(opt);
  CHECK_FALSE(report.passed());
  for (const auto& e : report.entries) CHECK(e.passed == (e.name != "lstm.output.weight"));
}

TEST_CASE("prepare and predict") {
  auto vocab = testing::make_topic_vocabulary();
  auto examples = testing::make_topic_examples(vocab, 6, 3);
  auto prepared = prepare_examples(examples, SyntheticHeadlineSource::lead(1), vocab.table, 50);
  REQUIRE(prepared.size() == 6);
  CHECK(prepared[0].synthetic.tokens == tokenize(lead_sentences(examples[0].body, 1)));

  auto params = init_params(ModelConfig{Variant::diff, Pooling::avg, 8, 4, 4, false}, 1);
  auto preds = predict(params, prepared, vocab.table);
  for (const auto& p : preds) {
    CHECK(p.p_incongruent + p.p_congruent == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.predicted == (p.p_incongruent > p.p_congruent ? 1 : 0));
  }
  EmbeddingTable other(3);
  CHECK_THROWS_AS(predict(params, prepared, other), ShapeError);
}

TEST_CASE("synthetic headline resolution") {
  ExamplePair ex{"n1", "Head", "First sentence. Second one.", std::string("given headline"), 0};
  CHECK(resolve_synthetic_headline(ex, SyntheticHeadlineSource::lead(1)) == "given headline");
  ex.synthetic_headline.reset();
  CHECK(resolve_synthetic_headline(ex, SyntheticHeadlineSource::lead(1)) == "First sentence.");

  testing::TempDir dir;
  testing::write_file(dir / "s.jsonl", "{\"id\":\"n1\",\"synthetic_headline\":\"from file\"}\n");
  ex.synthetic_headline = "given headline";
  CHECK(resolve_synthetic_headline(ex, SyntheticHeadlineSource::from_file(dir / "s.jsonl")) == "from file");

  EmbeddingTable table(2);
  std::vector<ExamplePair> bad{{"x", "?!", "Body.", std::nullopt, 0}};
  CHECK_NOTHROW(prepare_examples(bad, SyntheticHeadlineSource::lead(1), table, 50));
  bad[0].headline = " ";
  CHECK_THROWS_AS(prepare_examples(bad, SyntheticHeadlineSource::lead(1), table, 50), InputError);
}

}  // TEST_SUITE
