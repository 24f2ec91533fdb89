#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "musem/data.hpp"
#include "musem/error.hpp"

using namespace musem;
using testing::write_file;

TEST_SUITE("data") {

TEST_CASE("canonical records and labels") {
  testing::TempDir dir;
  write_file(dir / "d.jsonl",
             "{\"id\":\"a\",\"headline\":\"x\",\"body\":\"y\",\"label\":\"incongruent\"}\n"
             "{\"id\":\"b\",\"headline\":\"x\",\"body\":\"y\",\"label\":0,\"synthetic_headline\":\"s\"}\n"
             "\n"
             "{\"id\":3,\"headline\":\"x\",\"body\":\"y\",\"label\":\"CONGRUENT\"}\n");
  auto ex = ingest_canonical(dir / "d.jsonl");
  REQUIRE(ex.size() == 3);
  CHECK(ex[0].label == 1);
  CHECK(ex[1].label == 0);
  CHECK(ex[1].synthetic_headline == "s");
  CHECK_FALSE(ex[0].synthetic_headline.has_value());
  CHECK(ex[2].id == "3");
  CHECK(ex[2].label == 0);
}

TEST_CASE("canonical errors name the line") {
  testing::TempDir dir;
  write_file(dir / "missing.jsonl",
             "{\"id\":\"a\",\"headline\":\"x\",\"body\":\"y\",\"label\":1}\n"
             "{\"id\":\"b\",\"headline\":\"x\",\"label\":1}\n");
  CHECK_THROWS_WITH_AS(ingest_canonical(dir / "missing.jsonl"), doctest::Contains(":2:"), InputError);
  CHECK_THROWS_WITH_AS(ingest_canonical(dir / "missing.jsonl"), doctest::Contains("body"), InputError);

  write_file(dir / "label.jsonl", "{\"id\":\"a\",\"headline\":\"x\",\"body\":\"y\",\"label\":\"maybe\"}\n");
  CHECK_THROWS_AS(ingest_canonical(dir / "label.jsonl"), InputError);
  write_file(dir / "two.jsonl", "{\"id\":\"a\",\"headline\":\"x\",\"body\":\"y\",\"label\":2}\n");
  CHECK_THROWS_AS(ingest_canonical(dir / "two.jsonl"), InputError);
  write_file(dir / "blank.jsonl", "{\"id\":\"a\",\"headline\":\"  \",\"body\":\"y\",\"label\":1}\n");
  CHECK_THROWS_AS(ingest_canonical(dir / "blank.jsonl"), InputError);
  write_file(dir / "json.jsonl", "{\"id\":\"a\",\n");
  CHECK_THROWS_WITH_AS(ingest_canonical(dir / "json.jsonl"), doctest::Contains(":1:"), InputError);
  write_file(dir / "empty.jsonl", "\n\n");
  CHECK_THROWS_WITH_AS(ingest_canonical(dir / "empty.jsonl"), doctest::Contains("empty dataset"), InputError);
  CHECK_THROWS_AS(ingest_canonical(dir / "nope.jsonl"), InputError);

  write_file(dir / "unlabeled.jsonl", "{\"id\":\"a\",\"headline\":\"x\",\"body\":\"y\"}\n");
  CHECK_THROWS_AS(ingest_canonical(dir / "unlabeled.jsonl"), InputError);
  auto unlabeled = ingest_canonical(dir / "unlabeled.jsonl", false);
  CHECK_FALSE(unlabeled[0].label.has_value());
}

TEST_CASE("fuzzed records are either valid or rejected") {
  testing::TempDir dir;
  Rng rng(77);
  const char* fields[] = {"\"id\":\"k\"", "\"headline\":\"h\"", "\"body\":\"b\"", "\"label\":1"};
  const char* bad[] = {"\"id\":\"k\"", "\"headline\":\"\"", "\"body\":7", "\"label\":\"x\""};
  for (int trial = 0; trial < 100; ++trial) {
    std::string rec = "{";
    bool valid = true;
    for (int f = 0; f < 4; ++f) {
      const auto roll = rng.below(5);
      if (roll == 0) {
        valid = false;
        continue;
      }
      if (rec.size() > 1) rec += ",";
      if (roll == 1 && f > 0) {
        rec += bad[f];
        valid = false;
      } else {
        rec += fields[f];
      }
    }
    rec += "}\n";
    write_file(dir / "f.jsonl", rec);
    if (valid) {
      auto ex = ingest_canonical(dir / "f.jsonl");
      CHECK(ex.size() == 1);
      CHECK_FALSE(ex[0].headline.empty());
      CHECK_FALSE(ex[0].body.empty());
    } else {
      CHECK_THROWS_AS(ingest_canonical(dir / "f.jsonl"), InputError);
    }
  }
}

TEST_CASE("class weights") {
  auto w = balanced_class_weights({3, 1, 0});
  CHECK(w[0] == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(w[1] == 2.0);
  auto even = balanced_class_weights({5, 5, 0});
  CHECK(even[0] == 1.0);
  CHECK(even[1] == 1.0);
  auto lonely = balanced_class_weights({4, 0, 0});
  CHECK(lonely[0] == 0.5);
  CHECK(lonely[1] == 1.0);
}

TEST_CASE("label parsing") {
  CHECK(parse_label("0") == 0);
  CHECK(parse_label("1") == 1);
  CHECK(parse_label("Incongruent") == 1);
  CHECK_THROWS_AS(parse_label("2"), InputError);
}

TEST_CASE("nela17 prints a summary") {
  testing::TempDir dir;
  write_file(dir / "n.jsonl",
             "{\"id\":\"a\",\"headline\":\"x\",\"body\":\"y\",\"label\":1}\n"
             "{\"id\":\"b\",\"headline\":\"x\",\"body\":\"y\",\"label\":0}\n"
             "{\"id\":\"c\",\"headline\":\"x\",\"body\":\"y\",\"label\":0}\n");
  std::ostringstream summary;
  auto ex = ingest_nela17(dir / "n.jsonl", &summary);
  CHECK(ex.size() == 3);
  CHECK(summary.str().find('3') != std::string::npos);
  auto counts = count_classes(ex);
  CHECK(counts.congruent == 2);
  CHECK(counts.incongruent == 1);
  CHECK(counts.total() == 3);
}

TEST_CASE("clickbait challenge join") {
  testing::TempDir dir;
  write_file(dir / "instances.jsonl",
             "{\"id\":\"1\",\"postText\":[\"You won't believe\"],\"targetParagraphs\":[\"Para one.\",\"Para two.\"]}\n"
             "{\"id\":\"2\",\"postText\":\"Plain post\",\"targetParagraphs\":[\"Body.\"]}\n"
             "{\"id\":\"3\",\"postText\":[\"No truth\"],\"targetParagraphs\":[\"Body.\"]}\n"
             "{\"id\":\"4\",\"postText\":[\"\"],\"targetParagraphs\":[\"Body.\"]}\n");
  write_file(dir / "truth.jsonl",
             "{\"id\":\"1\",\"truthClass\":\"clickbait\"}\n"
             "{\"id\":\"2\",\"truthClass\":\"no-clickbait\"}\n"
             "{\"id\":\"4\",\"truthClass\":\"clickbait\"}\n");
  auto r = ingest_clickbait_challenge(dir / "instances.jsonl", dir / "truth.jsonl");
  REQUIRE(r.examples.size() == 2);
  CHECK(r.examples[0].label == 1);
  CHECK(r.examples[0].headline == "You won't believe");
  CHECK(r.examples[0].body == "Para one. Para two.");
  CHECK(r.examples[1].label == 0);
  CHECK(r.missing_truth == 1);
  CHECK(r.invalid == 1);

  write_file(dir / "none.jsonl", "{\"id\":\"9\",\"truthClass\":\"clickbait\"}\n");
  CHECK_THROWS_AS(ingest_clickbait_challenge(dir / "instances.jsonl", dir / "none.jsonl"), InputError);
  write_file(dir / "weird.jsonl", "{\"id\":\"1\",\"truthClass\":\"maybe\"}\n");
  CHECK_THROWS_AS(ingest_clickbait_challenge(dir / "instances.jsonl", dir / "weird.jsonl"), InputError);
  CHECK_THROWS_AS(ingest_clickbait_challenge(dir / "missing.jsonl", dir / "truth.jsonl"), InputError);
}

}  // TEST_SUITE
