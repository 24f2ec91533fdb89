#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "musem/classifier.hpp"

namespace musem {

/// One news item. label: 0 congruent, 1 incongruent; absent for unlabeled input.
struct ExamplePair {
  std::string id;
  std::string headline;
  std::string body;
  std::optional<std::string> synthetic_headline;
  std::optional<int> label;
};

struct ClassCounts {
  std::size_t congruent = 0;
  std::size_t incongruent = 0;
  std::size_t unlabeled = 0;

  std::size_t total() const { return congruent + incongruent + unlabeled; }
};

ClassCounts count_classes(const std::vector<ExamplePair>& examples);

/// w_c = n / (2 n_c) over labelled examples; a class with no examples gets 1.
ClassWeights balanced_class_weights(const ClassCounts& counts);

/// Accepts 0/1 or "congruent"/"incongruent" in any case. Throws InputError otherwise.
int parse_label(const std::string& text);

/// JSON-lines {"id", "headline", "body", "label", optional "synthetic_headline"}.
/// With labels_required false a missing label is allowed.
std::vector<ExamplePair> ingest_canonical(const std::filesystem::path& path, bool labels_required = true);

/// NELA17 pairs in canonical form; prints total and per-class counts to `summary`.
std::vector<ExamplePair> ingest_nela17(const std::filesystem::path& path, std::ostream* summary = nullptr);

struct ClickbaitIngest {
  std::vector<ExamplePair> examples;
  std::size_t missing_truth = 0;  // instances without a truth record
  std::size_t invalid = 0;        // instances with an empty post or body
};

/// Clickbait Challenge 2017 release: instances.jsonl (postText, targetParagraphs)
/// joined by id with truth.jsonl (truthClass).
ClickbaitIngest ingest_clickbait_challenge(const std::filesystem::path& instances_path,
                                           const std::filesystem::path& truth_path);

}  // namespace musem
