#include "fixtures.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "musem/numeric.hpp"

namespace musem::testing {

TempDir::TempDir() {
  static std::uint64_t counter = 0;
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    auto candidate = base / ("musem-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

EmbeddedSequence make_embedded(const Rows& rows, std::size_t padding) {
  const std::size_t dim = rows.empty() ? 0 : rows[0].size();
  EmbeddedSequence seq;
  seq.rows = Mat(rows.size() + padding, dim);
  seq.mask.assign(rows.size() + padding, false);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < dim; ++k) seq.rows(i, k) = rows[i][k];
    seq.mask[i] = true;
  }
  return seq;
}

Rows random_rows(Rng& rng, std::size_t n, std::size_t dim, double scale) {
  Rows rows(n);
  for (auto& r : rows) r = random_vec(rng, dim, scale);
  return rows;
}

Vec random_vec(Rng& rng, std::size_t n, double scale) {
  Vec v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TopicVocabulary make_topic_vocabulary(std::size_t dim, std::uint64_t seed) {
  TopicVocabulary v;
  v.dim = dim;
  v.topics = {
      {"tax", "budget", "senate", "vote", "bill", "deficit", "minister", "reform"},
      {"storm", "flood", "rain", "wind", "coast", "hurricane", "thunder", "tide"},
  };
  v.table = EmbeddingTable(dim);
  Rng rng(seed);
  const std::size_t block = dim / v.topics.size();
  for (std::size_t t = 0; t < v.topics.size(); ++t) {
    for (const auto& word : v.topics[t]) {
      Vec e(dim);
      for (auto& x : e) x = rng.uniform(-0.15, 0.15);
      for (std::size_t k = t * block; k < (t + 1) * block; ++k) e[k] += rng.uniform(1.6, 2.4);
      v.table.add(word, e);
    }
  }
  return v;
}

namespace {

std::string sentence(const TopicVocabulary& v, std::size_t topic, Rng& rng, std::size_t words) {
  std::string s;
  const auto& pool = v.topics[topic];
  for (std::size_t i = 0; i < words; ++i) {
    std::string w = pool[rng.below(pool.size())];
    if (i == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s;
}

}  // namespace

std::vector<ExamplePair> make_topic_examples(const TopicVocabulary& vocab, std::size_t n, std::uint64_t seed,
                                             const std::string& id_prefix) {
  Rng rng(seed);
  std::vector<ExamplePair> out;
  const std::size_t n_topics = vocab.topics.size();
  for (std::size_t i = 0; i < n; ++i) {
    ExamplePair ex;
    ex.id = id_prefix + std::to_string(i);
    const int label = static_cast<int>(i % 2);
    const std::size_t topic = rng.below(n_topics);
    const std::size_t lead_topic = label == 0 ? topic : (topic + 1 + rng.below(n_topics - 1)) % n_topics;
    ex.headline = sentence(vocab, topic, rng, 4 + rng.below(2));
    ex.body = sentence(vocab, lead_topic, rng, 4 + rng.below(2)) + ". " +
              sentence(vocab, rng.below(n_topics), rng, 5) + ". " +
              sentence(vocab, rng.below(n_topics), rng, 5) + ".";
    ex.label = label;
    out.push_back(std::move(ex));
  }
  return out;
}

void write_glove(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::map<std::size_t, std::string> by_row;
  for (const auto& [token, id] : table.vocabulary()) by_row.emplace(id, token);
  std::string text;
  char buf[32];
  for (const auto& [id, token] : by_row) {
    text += token;
    for (double x : table.row(id)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
      text += ' ';
      text.append(buf, ptr);
    }
    text += '\n';
  }
  write_file(path, text);
}

void write_canonical(const std::vector<ExamplePair>& examples, const std::filesystem::path& path) {
  std::string text;
  for (const auto& ex : examples) {
    nlohmann::json j = {{"id", ex.id}, {"headline", ex.headline}, {"body", ex.body}};
    if (ex.label) j["label"] = *ex.label;
    if (ex.synthetic_headline) j["synthetic_headline"] = *ex.synthetic_headline;
    text += j.dump() + "\n";
  }
  write_file(path, text);
}

}  // namespace musem::testing
