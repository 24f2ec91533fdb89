#include "musem/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>

#include "musem/error.hpp"

namespace musem {

namespace {

struct CodePoint {
  char32_t value;
  std::size_t begin;
  std::size_t length;
};

// Decodes UTF-8; a malformed byte is passed through as a one-byte code point.
std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    char32_t cp = lead;
    if (lead >= 0xF0 && lead < 0xF8) {
      len = 4;
      cp = lead & 0x07;
    } else if (lead >= 0xE0) {
      len = 3;
      cp = lead & 0x0F;
    } else if (lead >= 0xC0) {
      len = 2;
      cp = lead & 0x1F;
    }
    bool ok = len == 1 || i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto cont = static_cast<unsigned char>(text[i + k]);
      if ((cont & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (cont & 0x3F);
    }
    if (!ok) {
      len = 1;
      cp = lead;
    }
    out.push_back({cp, i, len});
    i += len;
  }
  return out;
}

bool is_space(char32_t c) {
  if (c < 0x80) return std::isspace(static_cast<int>(c)) != 0;
  return c == 0x00A0 || c == 0x1680 || (c >= 0x2000 && c <= 0x200B) || c == 0x2028 || c == 0x2029 ||
         c == 0x202F || c == 0x205F || c == 0x3000 || c == 0xFEFF;
}

// Marks that split a word wherever they appear.
bool is_hard_punct(char32_t c) {
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) || c == 0x00A1 || c == 0x00AB ||
         c == 0x00BB || c == 0x00BF || (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011);
}

// ASCII punctuation, split only at word edges.
bool is_edge_punct(char32_t c) { return c < 0x80 && std::ispunct(static_cast<int>(c)) != 0; }

std::string lowered(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

void split_edges(std::string_view word, std::vector<std::string>& out) {
  std::size_t lo = 0;
  std::size_t hi = word.size();
  while (lo < hi && is_edge_punct(static_cast<unsigned char>(word[lo]))) {
    out.emplace_back(1, word[lo]);
    ++lo;
  }
  std::size_t tail_start = hi;
  while (tail_start > lo && is_edge_punct(static_cast<unsigned char>(word[tail_start - 1]))) --tail_start;
  if (tail_start > lo) out.push_back(lowered(word.substr(lo, tail_start - lo)));
  for (std::size_t k = tail_start; k < hi; ++k) out.emplace_back(1, word[k]);
}

bool parse_double(std::string_view field, double& value) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  const auto cps = decode(text);
  std::size_t word_begin = std::string_view::npos;

  auto flush = [&](std::size_t end) {
    if (word_begin != std::string_view::npos && end > word_begin) {
      split_edges(text.substr(word_begin, end - word_begin), tokens);
    }
    word_begin = std::string_view::npos;
  };

  for (const auto& cp : cps) {
    if (is_space(cp.value)) {
      flush(cp.begin);
    } else if (is_hard_punct(cp.value)) {
      flush(cp.begin);
      tokens.emplace_back(text.substr(cp.begin, cp.length));
    } else if (word_begin == std::string_view::npos) {
      word_begin = cp.begin;
    }
  }
  flush(text.size());
  return tokens;
}

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim), rows_(2 * dim, 0.0) {
  if (dim == 0) throw ShapeError("embedding dimension must be positive");
}

bool EmbeddingTable::add(const std::string& token, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw ShapeError("embedding for '" + token + "' has dimension " + std::to_string(vector.size()) +
                     ", expected " + std::to_string(dim_));
  }
  const std::size_t id = 2 + index_.size();
  if (!index_.emplace(token, id).second) return false;
  rows_.insert(rows_.end(), vector.begin(), vector.end());
  return true;
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingTable::id_of(std::string_view token) const { return find(token).value_or(kUnkId); }

std::span<const double> EmbeddingTable::row(std::size_t id) const {
  if (id >= 2 + index_.size()) throw ShapeError("embedding row " + std::to_string(id) + " out of range");
  return {rows_.data() + id * dim_, dim_};
}

EmbeddingTable load_glove(const std::filesystem::path& path, const std::unordered_set<std::string>* keep) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read embeddings file: " + path.string());

  std::optional<EmbeddingTable> table;
  std::string line;
  std::size_t line_no = 0;
  Vec values;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    const std::size_t dim = fields.size() - 1;
    if (!table) {
      if (dim == 0) throw InputError(path.string() + ":" + std::to_string(line_no) + ": no vector components");
      table.emplace(dim);
    }
    if (dim != table->dim()) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": dimension error, expected " +
                       std::to_string(table->dim()) + " components, found " + std::to_string(dim));
    }
    std::string token(fields[0]);
    if (keep != nullptr && !keep->contains(token)) continue;
    values.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_double(fields[k + 1], values[k])) {
        throw InputError(path.string() + ":" + std::to_string(line_no) + ": malformed number '" +
                         std::string(fields[k + 1]) + "'");
      }
    }
    table->add(token, values);
  }
  if (!table) throw InputError("embeddings file is empty: " + path.string());
  return std::move(*table);
}

void write_vocabulary(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::map<std::size_t, std::string_view> by_row;
  for (const auto& [token, id] : table.vocabulary()) by_row.emplace(id, token);
  std::ofstream out(path);
  if (!out) throw InputError("cannot write vocabulary file: " + path.string());
  for (const auto& [id, token] : by_row) out << token << '\t' << id << '\n';
}

std::unordered_map<std::string, std::size_t> read_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read vocabulary file: " + path.string());
  std::unordered_map<std::string, std::size_t> vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    std::size_t id = 0;
    const char* end = line.data() + line.size();
    if (tab == std::string::npos || std::from_chars(line.data() + tab + 1, end, id).ptr != end) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected token<TAB>row");
    }
    vocab.emplace(line.substr(0, tab), id);
  }
  return vocab;
}

TokenSequence make_sequence(std::span<const std::string> tokens, const EmbeddingTable& table,
                            std::size_t max_len) {
  if (max_len == 0) throw ShapeError("max_len must be positive");
  TokenSequence seq;
  seq.declared_length = std::min(tokens.size(), max_len);
  seq.tokens.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(seq.declared_length));
  seq.ids.assign(max_len, EmbeddingTable::kPadId);
  seq.mask.assign(max_len, false);
  for (std::size_t i = 0; i < seq.declared_length; ++i) {
    seq.ids[i] = table.id_of(seq.tokens[i]);
    seq.mask[i] = true;
  }
  return seq;
}

TokenSequence make_sequence(std::string_view text, const EmbeddingTable& table, std::size_t max_len) {
  const auto tokens = tokenize(text);
  return make_sequence(tokens, table, max_len);
}

std::size_t EmbeddedSequence::real_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

EmbeddedSequence embed_sequence(const TokenSequence& seq, const EmbeddingTable& table) {
  EmbeddedSequence out{Mat(seq.max_len(), table.dim()), seq.mask};
  for (std::size_t i = 0; i < seq.max_len(); ++i) {
    if (!seq.mask[i]) continue;
    const auto src = table.row(seq.ids[i]);
    std::copy(src.begin(), src.end(), out.rows.row(i).begin());
  }
  return out;
}

}  // namespace musem
