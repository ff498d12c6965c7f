#include "treemil/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "treemil/errors.hpp"

namespace treemil {

double roc_auc_binary(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw MetricError("roc_auc_binary: empty or misaligned inputs");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks over tied score groups.
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double mid = static_cast<double>(i + j) / 2.0 + 1.0;  // ranks are 1-based
    for (std::size_t t = i; t <= j; ++t) rank[idx[t]] = mid;
    i = j + 1;
  }

  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (labels[t] == 1) {
      pos_rank_sum += rank[t];
      ++n_pos;
    }
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw MetricError("roc_auc_binary: needs at least one positive and one negative");
  }
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

AucReport roc_auc_ovr(const std::vector<std::vector<double>>& scores,
                      std::span<const int> labels, std::size_t n_classes) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw MetricError("roc_auc_ovr: empty or misaligned inputs");
  }
  AucReport report;
  report.per_class.assign(n_classes, std::nullopt);
  double sum = 0.0;
  std::size_t evaluable = 0;
  std::vector<double> col(scores.size());
  std::vector<int> bin(scores.size());
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      col[i] = scores[i][c];
      bin[i] = labels[i] == static_cast<int>(c) ? 1 : 0;
      n_pos += bin[i];
    }
    if (n_pos == 0 || n_pos == scores.size()) {
      report.skipped_classes.push_back(c);
      continue;
    }
    const double auc = roc_auc_binary(col, bin);
    report.per_class[c] = auc;
    sum += auc;
    ++evaluable;
  }
  if (evaluable == 0) throw MetricError("roc_auc_ovr: no class has both positives and negatives");
  report.macro = sum / static_cast<double>(evaluable);
  return report;
}

F1Report f1_suite(std::span<const int> preds, std::span<const int> labels,
                  std::size_t n_classes) {
  if (preds.size() != labels.size() || preds.empty()) {
    throw MetricError("f1_suite: empty or misaligned inputs");
  }
  F1Report report;
  report.per_class.assign(n_classes, 0.0);
  report.support.assign(n_classes, 0);
  std::vector<std::size_t> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i];
    const int g = labels[i];
    if (p < 0 || g < 0 || static_cast<std::size_t>(p) >= n_classes ||
        static_cast<std::size_t>(g) >= n_classes) {
      throw ContractError("f1_suite: label outside [0, n_classes)");
    }
    ++report.support[g];
    if (p == g) {
      ++tp[p];
      ++correct;
    } else {
      ++fp[p];
      ++fn[g];
    }
  }
  double macro_sum = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const double denom_p = static_cast<double>(tp[c] + fp[c]);
    const double denom_r = static_cast<double>(tp[c] + fn[c]);
    const double prec = denom_p > 0.0 ? tp[c] / denom_p : 0.0;
    const double rec = denom_r > 0.0 ? tp[c] / denom_r : 0.0;
    const double f1 = (prec + rec) > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    report.per_class[c] = f1;
    macro_sum += f1;
  }
  report.macro = macro_sum / static_cast<double>(n_classes);
  report.micro = static_cast<double>(correct) / static_cast<double>(preds.size());
  return report;
}

std::string EvalReport::to_table() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "task: %s\n", task.c_str());
  out += line;
  std::string header = "  AUC    MicF   MacF ";
  for (const auto& name : class_names) header += "  F1(" + name + ")";
  out += header + "\n";
  std::snprintf(line, sizeof(line), "  %.4f %.4f %.4f", auc, micro_f1, macro_f1);
  out += line;
  for (double f1 : per_class_f1) {
    std::snprintf(line, sizeof(line), "  %.4f ", f1);
    out += line;
  }
  out += "\n";
  if (!auc_skipped.empty()) {
    out += "  (AUC skipped classes without both positives and negatives:";
    for (const auto& c : auc_skipped) out += " " + c;
    out += ")\n";
  }
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["task"] = task;
  j["auc"] = auc;
  j["micro_f1"] = micro_f1;
  j["macro_f1"] = macro_f1;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  nlohmann::ordered_json sup = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    per[class_names[c]] = per_class_f1[c];
    sup[class_names[c]] = support[c];
  }
  j["per_class_f1"] = std::move(per);
  j["support"] = std::move(sup);
  j["auc_skipped"] = auc_skipped;
  return j.dump(2);
}

EvalReport make_eval_report(const std::string& task,
                            const std::vector<std::vector<double>>& scores,
                            std::span<const int> preds, std::span<const int> labels,
                            const std::vector<std::string>& class_names) {
  EvalReport report;
  report.task = task;
  report.class_names = class_names;
  const auto auc = roc_auc_ovr(scores, labels, class_names.size());
  report.auc = auc.macro;
  for (std::size_t c : auc.skipped_classes) report.auc_skipped.push_back(class_names[c]);
  const auto f1 = f1_suite(preds, labels, class_names.size());
  report.micro_f1 = f1.micro;
  report.macro_f1 = f1.macro;
  report.per_class_f1 = f1.per_class;
  report.support = f1.support;
  return report;
}

}  // namespace treemil
