#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "musem/numeric.hpp"

namespace musem {

inline constexpr std::size_t kDefaultMaxLen = 50;

/// Lowercases ASCII letters and splits on whitespace. Punctuation at either
/// edge of a word becomes its own token, one character per token. Unicode
/// dashes, quotes and similar marks from the General Punctuation block split
/// a word wherever they occur: "Milk" U+2014 "bad?" gives milk, U+2014, bad, ?.
std::vector<std::string> tokenize(std::string_view text);

/// Frozen word vectors. Row 0 is the padding vector and row 1 the shared
/// out-of-vocabulary vector; both are all zeros. Vocabulary rows start at 2.
class EmbeddingTable {
 public:
  static constexpr std::size_t kPadId = 0;
  static constexpr std::size_t kUnkId = 1;

  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const { return dim_; }
  // Number of vocabulary entries (excluding the pad and unk rows).
  std::size_t vocab_size() const { return index_.size(); }

  // Returns false if the token was already present (first occurrence wins).
  bool add(const std::string& token, std::span<const double> vector);

  std::optional<std::size_t> find(std::string_view token) const;
  std::size_t id_of(std::string_view token) const;  // kUnkId when unseen
  std::span<const double> row(std::size_t id) const;
  std::span<const double> lookup(std::string_view token) const { return row(id_of(token)); }
  std::span<const double> unk_vector() const { return row(kUnkId); }
  std::span<const double> pad_vector() const { return row(kPadId); }

  const auto& vocabulary() const { return index_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };

  std::size_t dim_;
  std::vector<double> rows_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

/// Reads a GloVe text file: one token followed by d floats per line, with d
/// taken from the first line. When `keep` is given, only those tokens are
/// stored (every line is still validated).
EmbeddingTable load_glove(const std::filesystem::path& path,
                          const std::unordered_set<std::string>* keep = nullptr);

// Sidecar vocabulary cache, one "token<TAB>row" per line sorted by row.
void write_vocabulary(const EmbeddingTable& table, const std::filesystem::path& path);
std::unordered_map<std::string, std::size_t> read_vocabulary(const std::filesystem::path& path);

struct TokenSequence {
  std::vector<std::string> tokens;  // the kept (real) tokens only
  std::vector<std::size_t> ids;     // padded to max_len with kPadId
  Mask mask;                        // true at the first declared_length positions
  std::size_t declared_length = 0;

  std::size_t max_len() const { return ids.size(); }
};

/// Pads or truncates to max_len. Over-long inputs keep their first max_len tokens.
TokenSequence make_sequence(std::span<const std::string> tokens, const EmbeddingTable& table,
                            std::size_t max_len = kDefaultMaxLen);
TokenSequence make_sequence(std::string_view text, const EmbeddingTable& table,
                            std::size_t max_len = kDefaultMaxLen);

struct EmbeddedSequence {
  Mat rows;  // max_len x d, padding rows zero
  Mask mask;

  std::size_t length() const { return rows.rows; }
  std::size_t real_count() const;
};

EmbeddedSequence embed_sequence(const TokenSequence& seq, const EmbeddingTable& table);

}  // namespace musem
