#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "musem/data.hpp"
#include "musem/numeric.hpp"
#include "musem/text.hpp"

namespace musem::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

using Rows = std::vector<std::vector<double>>;

/// Sequence of the given real rows followed by `padding` zero rows.
EmbeddedSequence make_embedded(const Rows& rows, std::size_t padding = 0);
Rows random_rows(Rng& rng, std::size_t n, std::size_t dim, double scale = 1.0);
Vec random_vec(Rng& rng, std::size_t n, double scale = 1.0);

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

/// Topic vocabulary for the constructed corpus: two topics, each owning half
/// of the embedding coordinates.
struct TopicVocabulary {
  std::size_t dim = 8;
  std::vector<std::vector<std::string>> topics;
  EmbeddingTable table{8};
};

TopicVocabulary make_topic_vocabulary(std::size_t dim = 8, std::uint64_t seed = 11);

/// Balanced corpus. A congruent item's body opens with a sentence drawn from
/// the headline's topic; an incongruent item's body opens with a sentence
/// from a different topic. Later body sentences are filler.
std::vector<ExamplePair> make_topic_examples(const TopicVocabulary& vocab, std::size_t n, std::uint64_t seed,
                                             const std::string& id_prefix = "ex");

void write_glove(const EmbeddingTable& table, const std::filesystem::path& path);
void write_canonical(const std::vector<ExamplePair>& examples, const std::filesystem::path& path);

}  // namespace musem::testing
