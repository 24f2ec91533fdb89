#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include <json.hpp>

namespace musem {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// confusion[true_label][predicted_label]
using Confusion = std::array<std::array<std::size_t, 2>, 2>;

struct MetricsReport {
  std::size_t n_examples = 0;
  double macro_f1 = 0.0;
  double auc = 0.0;
  std::array<ClassMetrics, 2> per_class{};
  Confusion confusion{};
};

Confusion confusion_matrix(std::span<const int> labels, std::span<const int> predictions);
std::array<ClassMetrics, 2> per_class_metrics(const Confusion& confusion);

/// Unweighted mean of the two per-class F1 scores. A class whose precision
/// and recall are both zero contributes 0. Throws DomainError on empty input.
double macro_f1(std::span<const int> labels, std::span<const int> predictions);

/// ROC AUC as the Mann-Whitney statistic, ties counted half.
/// Throws DomainError("AUC undefined ...") unless both classes occur.
double auc(std::span<const int> labels, std::span<const double> scores);
std::optional<double> try_auc(std::span<const int> labels, std::span<const double> scores);

/// scores are incongruent-class probabilities.
MetricsReport compute_metrics(std::span<const int> labels, std::span<const int> predictions,
                              std::span<const double> scores);

nlohmann::json to_json(const MetricsReport& report);

}  // namespace musem
