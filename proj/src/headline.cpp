#include "musem/headline.hpp"

#include <cctype>
#include <charconv>
#include <fstream>

#include <json.hpp>

#include "musem/error.hpp"

namespace musem {

namespace {

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace

std::vector<std::string_view> split_sentences(std::string_view text) {
  std::vector<std::string_view> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_terminator(text[i])) continue;
    if (i + 1 < text.size() && !is_ws(text[i + 1])) continue;
    const auto s = trim(text.substr(start, i + 1 - start));
    if (!s.empty()) sentences.push_back(s);
    start = i + 1;
  }
  const auto rest = trim(text.substr(start));
  if (!rest.empty()) sentences.push_back(rest);
  return sentences;
}

std::string lead_sentences(std::string_view body, std::size_t k) {
  if (k == 0) throw InputError("lead_k requires k >= 1");
  const auto sentences = split_sentences(body);
  if (sentences.empty()) throw InputError("cannot take lead sentences of an empty body");
  const auto& first = sentences.front();
  const auto& last = sentences[std::min(k, sentences.size()) - 1];
  // Sentences are views into body, so the span between them is verbatim text.
  return std::string(first.data(), static_cast<std::size_t>(last.data() + last.size() - first.data()));
}

SyntheticHeadlineSource SyntheticHeadlineSource::lead(std::size_t k) {
  if (k == 0) throw InputError("lead_k requires k >= 1");
  SyntheticHeadlineSource src;
  src.kind_ = Kind::lead_k;
  src.k_ = k;
  return src;
}

SyntheticHeadlineSource SyntheticHeadlineSource::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read synthetic headline file: " + path.string());
  auto table = std::make_shared<std::unordered_map<std::string, std::string>>();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(where + ": invalid JSON (" + e.what() + ")");
    }
    if (!record.is_object() || !record.contains("id") || !record.contains("synthetic_headline") ||
        !record["synthetic_headline"].is_string()) {
      throw InputError(where + ": expected {\"id\", \"synthetic_headline\"}");
    }
    const auto& id = record["id"];
    std::string key = id.is_string() ? id.get<std::string>() : id.dump();
    auto text = record["synthetic_headline"].get<std::string>();
    if (trim(text).empty()) throw InputError(where + ": empty synthetic headline for id " + key);
    table->insert_or_assign(std::move(key), std::move(text));
  }
  SyntheticHeadlineSource src;
  src.kind_ = Kind::file_backed;
  src.path_ = path;
  src.headlines_ = std::move(table);
  return src;
}

SyntheticHeadlineSource SyntheticHeadlineSource::parse(std::string_view spec) {
  if (spec == "lead") return lead(1);
  if (spec.starts_with("lead:")) {
    std::size_t k = 0;
    const auto digits = spec.substr(5);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw InputError("bad provider spec '" + std::string(spec) + "'");
    }
    return lead(k);
  }
  if (spec.starts_with("file:")) return from_file(std::filesystem::path(spec.substr(5)));
  throw InputError("unknown provider '" + std::string(spec) + "' (expected lead:K or file:PATH)");
}

std::string SyntheticHeadlineSource::describe() const {
  if (kind_ == Kind::lead_k) return "lead:" + std::to_string(k_);
  return "file:" + path_.string();
}

std::string SyntheticHeadlineSource::provide(std::string_view example_id, std::string_view body) const {
  if (kind_ == Kind::lead_k) return lead_sentences(body, k_);
  auto it = headlines_->find(std::string(example_id));
  if (it == headlines_->end()) {
    throw InputError("synthetic headline file " + path_.string() + " has no entry for id " +
                     std::string(example_id));
  }
  return it->second;
}

}  // namespace musem
