#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace treemil {

// Rank-statistic ROC AUC with midrank tie handling. labels are 0/1;
// requires at least one positive and one negative.
double roc_auc_binary(std::span<const double> scores, std::span<const int> labels);

struct AucReport {
  double macro = 0.0;                             // mean over evaluable classes
  std::vector<std::optional<double>> per_class;   // nullopt when skipped
  std::vector<std::size_t> skipped_classes;       // classes lacking pos or neg
};

// One-vs-rest AUC per class, macro-averaged over the classes that have both
// positives and negatives. scores[i][c] ranks instance i for class c.
AucReport roc_auc_ovr(const std::vector<std::vector<double>>& scores,
                      std::span<const int> labels, std::size_t n_classes);

struct F1Report {
  double micro = 0.0;  // pooled; equals accuracy for single-label problems
  double macro = 0.0;  // unweighted mean over the full class set
  std::vector<double> per_class;
  std::vector<std::size_t> support;
};

// Per-class precision/recall/F1 with the 0/0 := 0 convention.
F1Report f1_suite(std::span<const int> preds, std::span<const int> labels,
                  std::size_t n_classes);

// Task-level report in the layout of the paper-style result tables.
struct EvalReport {
  std::string task;  // "rumor" or "stance"
  double auc = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::vector<std::string> class_names;
  std::vector<double> per_class_f1;
  std::vector<std::size_t> support;
  std::vector<std::string> auc_skipped;

  std::string to_table() const;
  std::string to_json() const;
};

EvalReport make_eval_report(const std::string& task,
                            const std::vector<std::vector<double>>& scores,
                            std::span<const int> preds, std::span<const int> labels,
                            const std::vector<std::string>& class_names);

}  // namespace treemil
