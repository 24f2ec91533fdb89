#include "musem/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "musem/error.hpp"

namespace musem {

namespace {

void check_binary(std::span<const int> values, const char* what) {
  for (int v : values) {
    if (v != 0 && v != 1) throw InputError(std::string(what) + " must be 0 or 1");
  }
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Confusion confusion_matrix(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.size() != predictions.size()) throw ShapeError("labels and predictions differ in length");
  check_binary(labels, "labels");
  check_binary(predictions, "predictions");
  Confusion c{};
  for (std::size_t i = 0; i < labels.size(); ++i) ++c[labels[i]][predictions[i]];
  return c;
}

std::array<ClassMetrics, 2> per_class_metrics(const Confusion& c) {
  std::array<ClassMetrics, 2> out{};
  for (int k = 0; k < 2; ++k) {
    const std::size_t tp = c[k][k];
    const std::size_t predicted = c[0][k] + c[1][k];
    const std::size_t actual = c[k][0] + c[k][1];
    auto& m = out[k];
    m.precision = ratio(tp, predicted);
    m.recall = ratio(tp, actual);
    // 2PR/(P+R) written over counts; 0 when the class is never predicted or present.
    m.f1 = ratio(2 * tp, predicted + actual);
  }
  return out;
}

double macro_f1(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.empty()) throw DomainError("macro F1 undefined for empty input");
  const auto per_class = per_class_metrics(confusion_matrix(labels, predictions));
  return (per_class[0].f1 + per_class[1].f1) / 2.0;
}

double auc(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw ShapeError("labels and scores differ in length");
  check_binary(labels, "labels");
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DomainError("AUC undefined: only one class present");

  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of positive ranks, with tied groups sharing their mean rank. Ranks
  // are kept doubled so the sum stays an integer.
  std::size_t doubled_rank_sum = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const std::size_t doubled_mean = (i + 1) + (j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) doubled_rank_sum += doubled_mean;
    }
    i = j + 1;
  }
  const std::size_t doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
  return static_cast<double>(doubled_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::optional<double> try_auc(std::span<const int> labels, std::span<const double> scores) {
  const auto n_pos = std::count(labels.begin(), labels.end(), 1);
  if (n_pos == 0 || static_cast<std::size_t>(n_pos) == labels.size()) return std::nullopt;
  return auc(labels, scores);
}

MetricsReport compute_metrics(std::span<const int> labels, std::span<const int> predictions,
                              std::span<const double> scores) {
  MetricsReport r;
  r.n_examples = labels.size();
  r.confusion = confusion_matrix(labels, predictions);
  r.per_class = per_class_metrics(r.confusion);
  r.macro_f1 = macro_f1(labels, predictions);
  r.auc = auc(labels, scores);
  return r;
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json per_class = nlohmann::json::object();
  const char* names[] = {"congruent", "incongruent"};
  for (int k = 0; k < 2; ++k) {
    per_class[names[k]] = {{"precision", report.per_class[k].precision},
                           {"recall", report.per_class[k].recall},
                           {"f1", report.per_class[k].f1}};
  }
  return {{"n_examples", report.n_examples},
          {"macro_f1", report.macro_f1},
          {"auc", report.auc},
          {"per_class", per_class},
          {"confusion", report.confusion}};
}

}  // namespace musem
