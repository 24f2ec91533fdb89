#include "musem/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "musem/error.hpp"

namespace musem {

namespace {

using nlohmann::json;

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Visits every non-blank line of a JSON-lines file as a parsed object.
template <typename F>
void for_each_record(const std::filesystem::path& path, F&& visit) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(where + ": invalid JSON (" + e.what() + ")");
    }
    if (!record.is_object()) throw InputError(where + ": expected a JSON object");
    visit(record, where);
  }
}

std::string id_string(const json& value) { return value.is_string() ? value.get<std::string>() : value.dump(); }

std::string required_text(const json& record, const char* field, const std::string& where) {
  if (!record.contains(field)) throw InputError(where + ": missing field \"" + field + "\"");
  const auto& v = record[field];
  if (!v.is_string()) throw InputError(where + ": field \"" + field + "\" must be a string");
  auto s = v.get<std::string>();
  if (blank(s)) throw InputError(where + ": field \"" + field + "\" is empty");
  return s;
}

// Joins a string or an array of strings with single spaces.
std::string joined_text(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  std::string out;
  if (!value.is_array()) return out;
  for (const auto& part : value) {
    if (!part.is_string()) continue;
    const auto s = part.get<std::string>();
    if (blank(s)) continue;
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

}  // namespace

ClassCounts count_classes(const std::vector<ExamplePair>& examples) {
  ClassCounts counts;
  for (const auto& ex : examples) {
    if (!ex.label) {
      ++counts.unlabeled;
    } else if (*ex.label == kCongruent) {
      ++counts.congruent;
    } else {
      ++counts.incongruent;
    }
  }
  return counts;
}

ClassWeights balanced_class_weights(const ClassCounts& counts) {
  const double n = static_cast<double>(counts.congruent + counts.incongruent);
  auto weight = [n](std::size_t n_c) { return n_c == 0 ? 1.0 : n / (2.0 * static_cast<double>(n_c)); };
  return {weight(counts.congruent), weight(counts.incongruent)};
}

int parse_label(const std::string& text) {
  const auto l = lower(text);
  if (l == "congruent" || l == "0") return kCongruent;
  if (l == "incongruent" || l == "1") return kIncongruent;
  throw InputError("unknown label '" + text + "'");
}

std::vector<ExamplePair> ingest_canonical(const std::filesystem::path& path, bool labels_required) {
  std::vector<ExamplePair> out;
  for_each_record(path, [&](const json& record, const std::string& where) {
    ExamplePair ex;
    if (!record.contains("id")) throw InputError(where + ": missing field \"id\"");
    ex.id = id_string(record["id"]);
    if (ex.id.empty()) throw InputError(where + ": field \"id\" is empty");
    ex.headline = required_text(record, "headline", where);
    ex.body = required_text(record, "body", where);
    if (record.contains("synthetic_headline") && !record["synthetic_headline"].is_null()) {
      ex.synthetic_headline = required_text(record, "synthetic_headline", where);
    }
    if (record.contains("label") && !record["label"].is_null()) {
      const auto& label = record["label"];
      try {
        if (label.is_number_integer()) {
          const auto v = label.get<long long>();
          if (v != 0 && v != 1) throw InputError("label must be 0 or 1, got " + std::to_string(v));
          ex.label = static_cast<int>(v);
        } else if (label.is_string()) {
          ex.label = parse_label(label.get<std::string>());
        } else {
          throw InputError("unsupported label " + label.dump());
        }
      } catch (const InputError& e) {
        throw InputError(where + ": " + e.what());
      }
    } else if (labels_required) {
      throw InputError(where + ": missing field \"label\"");
    }
    out.push_back(std::move(ex));
  });
  if (out.empty()) throw InputError("empty dataset: " + path.string());
  return out;
}

std::vector<ExamplePair> ingest_nela17(const std::filesystem::path& path, std::ostream* summary) {
  auto examples = ingest_canonical(path);
  if (summary != nullptr) {
    const auto counts = count_classes(examples);
    *summary << "NELA17 " << path.string() << ": total " << counts.total() << ", congruent " << counts.congruent
             << ", incongruent " << counts.incongruent << '\n';
  }
  return examples;
}

ClickbaitIngest ingest_clickbait_challenge(const std::filesystem::path& instances_path,
                                           const std::filesystem::path& truth_path) {
  std::unordered_map<std::string, int> truth;
  for_each_record(truth_path, [&](const json& record, const std::string& where) {
    if (!record.contains("id") || !record.contains("truthClass") || !record["truthClass"].is_string()) {
      throw InputError(where + ": expected \"id\" and \"truthClass\"");
    }
    const auto cls = lower(record["truthClass"].get<std::string>());
    int label = kCongruent;
    if (cls == "clickbait") {
      label = kIncongruent;
    } else if (cls != "no-clickbait") {
      throw InputError(where + ": unknown truthClass '" + cls + "'");
    }
    truth.insert_or_assign(id_string(record["id"]), label);
  });

  ClickbaitIngest result;
  for_each_record(instances_path, [&](const json& record, const std::string& where) {
    if (!record.contains("id")) throw InputError(where + ": missing field \"id\"");
    ExamplePair ex;
    ex.id = id_string(record["id"]);
    auto it = truth.find(ex.id);
    if (it == truth.end()) {
      ++result.missing_truth;
      return;
    }
    ex.headline = record.contains("postText") ? joined_text(record["postText"]) : std::string();
    ex.body = record.contains("targetParagraphs") ? joined_text(record["targetParagraphs"]) : std::string();
    if (blank(ex.headline) || blank(ex.body)) {
      ++result.invalid;
      return;
    }
    ex.label = it->second;
    result.examples.push_back(std::move(ex));
  });
  if (result.examples.empty()) {
    throw InputError("no Clickbait Challenge instances could be joined with " + truth_path.string());
  }
  return result;
}

}  // namespace musem
