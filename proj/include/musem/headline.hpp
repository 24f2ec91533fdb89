#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace musem {

/// Splits on '.', '!' or '?' followed by whitespace or end of text. Each
/// sentence keeps its terminator; surrounding whitespace is trimmed.
std::vector<std::string_view> split_sentences(std::string_view text);

/// Where synthetic headlines come from: a JSON-lines file of
/// {"id", "synthetic_headline"} records produced by an external generator,
/// or the first k sentences of the body.
class SyntheticHeadlineSource {
 public:
  enum class Kind { file_backed, lead_k };

  static SyntheticHeadlineSource lead(std::size_t k);
  static SyntheticHeadlineSource from_file(const std::filesystem::path& path);
  // "lead:K" or "file:PATH"; "lead" alone means lead:1.
  static SyntheticHeadlineSource parse(std::string_view spec);

  Kind kind() const { return kind_; }
  std::size_t k() const { return k_; }
  const std::filesystem::path& path() const { return path_; }
  std::string describe() const;

  /// The synthetic headline for one news item. Throws InputError for an
  /// empty body (lead_k) or an id missing from the file.
  std::string provide(std::string_view example_id, std::string_view body) const;

 private:
  SyntheticHeadlineSource() = default;

  Kind kind_ = Kind::lead_k;
  std::size_t k_ = 1;
  std::filesystem::path path_;
  std::shared_ptr<const std::unordered_map<std::string, std::string>> headlines_;
};

std::string lead_sentences(std::string_view body, std::size_t k);

}  // namespace musem
