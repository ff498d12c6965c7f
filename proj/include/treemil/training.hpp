#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treemil/adam.hpp"
#include "treemil/dataset.hpp"
#include "treemil/milbank.hpp"

namespace treemil {

struct TrainConfig {
  Direction direction = Direction::TD;
  VeracitySet classes = VeracitySet::ntfu();
  double lr = 0.001;
  int max_epochs = 150;
  int patience = 10;  // early stop on validation loss; <=0 disables
  std::size_t hidden = 100;
  std::size_t embed_dim = 100;
  std::uint64_t seed = 1;
  int parallel = 0;  // 0 = all processors

  void validate() const;
};

// One training-log line: stage 1 logs per classifier, stage 2 logs as "agg".
struct EpochRecord {
  int stage = 1;
  std::string who;  // "clf3" or "agg"
  int epoch = 0;
  double loss = 0.0;  // epoch total, matching the summed loss definition
  double seconds = 0.0;
  std::optional<double> val_loss;
};

// Binary negative log likelihood with probabilities clamped to
// [1e-12, 1-1e-12] before the log.
NodePtr loss_bin_node(const NodePtr& y_hat, int y);
double loss_bin_value(double y_hat, int y);

// Per-claim aggregation loss: binary cross-entropy of every class score
// against the one-hot gold indicator, summed over classes.
NodePtr loss_agg_node(std::span<const NodePtr> y_hat, std::size_t gold_idx);
double loss_agg_value(std::span<const double> y_hat, std::size_t gold_idx);

// Stage 1: trains each binary classifier independently (one Adam step per
// tree) against binarized bag labels. Classifiers have disjoint parameters
// and train in parallel. Restores each classifier's best-validation
// snapshot when a validation set is given.
std::vector<EpochRecord> train_stage1(ClassifierBank& bank,
                                      const std::vector<PropagationTree>& train,
                                      const std::vector<PropagationTree>& val,
                                      const TrainConfig& cfg);

// Stage 2: freezes the bank, precomputes its outputs, and trains only the
// aggregation encoder on the regrouped veracity loss.
std::vector<EpochRecord> train_stage2(ClassifierBank& bank,
                                      const std::vector<PropagationTree>& train,
                                      const std::vector<PropagationTree>& val,
                                      const TrainConfig& cfg);

}  // namespace treemil
