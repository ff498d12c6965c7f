#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "treemil/metrics.hpp"
#include "treemil/milbank.hpp"
#include "treemil/training.hpp"

namespace treemil {

// Everything a CLI run needs. Paths are resolved by the caller; all outputs
// land under out_dir.
struct RunConfig {
  std::filesystem::path train_path;
  std::filesystem::path val_path;        // optional; seeded 20% holdout otherwise
  std::filesystem::path test_path;
  std::filesystem::path out_dir;
  std::filesystem::path checkpoint;      // eval/predict input, train resume
  std::filesystem::path embedding_path;  // optional pretrained embeddings

  Direction direction = Direction::TD;
  VeracitySet classes = VeracitySet::ntfu();
  double lr = 0.001;
  int max_epochs = 150;
  int patience = 10;
  std::size_t hidden = 100;
  std::size_t embed_dim = 100;
  std::uint64_t seed = 1;
  int parallel = 0;
  double holdout_fraction = 0.2;
  bool dump_attention = false;

  TrainConfig train_config() const;
};

struct TrainOutput {
  std::filesystem::path stage1_checkpoint;
  std::filesystem::path stage2_checkpoint;
  std::filesystem::path log_path;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  bool resumed_stage1 = false;
};

// Stage 1 then stage 2 (stage 1 restored from cfg.checkpoint when given),
// with checkpoints and a JSONL epoch log under cfg.out_dir.
TrainOutput run_train(const RunConfig& cfg);

// In-memory variant used by tests and the acceptance harness.
struct TrainedModel {
  Vocabulary vocab;
  ClassifierBank bank;
  std::vector<EpochRecord> log;
};
TrainedModel train_in_memory(std::vector<PropagationTree> train_trees,
                             std::vector<PropagationTree> val_trees, const RunConfig& cfg);

struct EvalOutput {
  EvalReport rumor;
  std::optional<EvalReport> stance;
  std::filesystem::path predictions_path;
  std::filesystem::path report_text_path;
};

EvalOutput run_eval(const RunConfig& cfg);

// Prediction dump only; gold labels are passed through when present.
std::filesystem::path run_predict(const RunConfig& cfg);

// Shared pieces, also used by the acceptance suite.
std::vector<ClaimPrediction> predict_dataset(const ClassifierBank& bank,
                                             const std::vector<PropagationTree>& trees,
                                             int parallel, bool keep_attention);
EvalReport rumor_report(const std::vector<ClaimPrediction>& preds, const VeracitySet& classes);
// Empty optional when no post carries a gold stance. The claim node's own
// stance prediction is excluded.
std::optional<EvalReport> stance_report(const std::vector<ClaimPrediction>& preds);
std::string claim_prediction_to_json(const ClaimPrediction& pred, const VeracitySet& classes,
                                     bool include_attention);

Checkpoint bank_checkpoint(const ClassifierBank& bank, const Vocabulary& vocab, int stage);
// Rebuilds vocabulary + bank from a checkpoint (any stage).
std::pair<Vocabulary, ClassifierBank> bank_from_checkpoint(const Checkpoint& ckpt);

void write_train_log(const std::filesystem::path& path,
                     const std::vector<EpochRecord>& records);

}  // namespace treemil
