#include "treemil/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "treemil/parallel.hpp"

namespace treemil {

namespace {
constexpr double kProbClamp = 1e-12;
}

void TrainConfig::validate() const {
  if (lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (hidden == 0 || embed_dim == 0) throw ConfigError("hidden/embed dims must be positive");
}

NodePtr loss_bin_node(const NodePtr& y_hat, int y) {
  NodePtr p = clamp(y_hat, kProbClamp, 1.0 - kProbClamp);
  NodePtr one = constant_scalar(1.0);
  NodePtr pos = scale(log_op(p), static_cast<double>(y));
  NodePtr neg = scale(log_op(sub(one, p)), 1.0 - static_cast<double>(y));
  return scale(add(pos, neg), -1.0);
}

double loss_bin_value(double y_hat, int y) {
  const double p = std::clamp(y_hat, kProbClamp, 1.0 - kProbClamp);
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

NodePtr loss_agg_node(std::span<const NodePtr> y_hat, std::size_t gold_idx) {
  if (y_hat.empty() || gold_idx >= y_hat.size()) {
    throw ContractError("loss_agg: gold index out of range");
  }
  NodePtr total;
  for (std::size_t c = 0; c < y_hat.size(); ++c) {
    NodePtr term = loss_bin_node(y_hat[c], c == gold_idx ? 1 : 0);
    total = total ? add(total, term) : term;
  }
  return total;
}

double loss_agg_value(std::span<const double> y_hat, std::size_t gold_idx) {
  if (y_hat.empty() || gold_idx >= y_hat.size()) {
    throw ContractError("loss_agg: gold index out of range");
  }
  double total = 0.0;
  for (std::size_t c = 0; c < y_hat.size(); ++c) {
    total += loss_bin_value(y_hat[c], c == gold_idx ? 1 : 0);
  }
  return total;
}

namespace {

// Shared early-stopping bookkeeping: tracks the best validation loss and the
// snapshot that produced it.
struct EarlyStop {
  int patience;
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  ParamMap best_snapshot;

  explicit EarlyStop(int patience_) : patience(patience_) {}

  // Returns true when training should stop.
  bool observe(double val_loss, const ParamRegistry& params) {
    if (val_loss < best) {
      best = val_loss;
      stale = 0;
      best_snapshot = params.snapshot();
      return false;
    }
    ++stale;
    return patience > 0 && stale >= patience;
  }

  void restore(ParamRegistry& params) {
    if (!best_snapshot.empty()) params.restore(best_snapshot);
  }
};

double stage1_validation_loss(const ClassifierBank& bank, std::size_t k,
                              const std::vector<PropagationTree>& val) {
  NoGradGuard guard;
  const BinaryClassifier& clf = bank.classifiers[k];
  double total = 0.0;
  for (const auto& tree : val) {
    ClassifierForward fwd = classifier_forward(clf, tree, bank.cfg.direction);
    total += loss_bin_value(fwd.claim_prob->scalar(),
                            binarize_label(tree.veracity, clf.pair, bank.cfg.classes));
  }
  return total;
}

void train_one_classifier(ClassifierBank& bank, std::size_t k,
                          const std::vector<PropagationTree>& train,
                          const std::vector<PropagationTree>& val, const TrainConfig& cfg,
                          std::vector<EpochRecord>& records) {
  BinaryClassifier& clf = bank.classifiers[k];
  ParamRegistry params = clf.params;
  const auto nodes = params.nodes();
  AdamState adam;
  adam.lr = cfg.lr;
  EarlyStop stopper(cfg.patience);
  const std::string who = "clf" + std::to_string(k);

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng shuffle_rng(Rng::derive(cfg.seed, "stage1-order", k, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t idx : order) {
      const PropagationTree& tree = train[idx];
      const int y = binarize_label(tree.veracity, clf.pair, bank.cfg.classes);
      NodePtr loss;
      try {
        ClassifierForward fwd = classifier_forward(clf, tree, bank.cfg.direction);
        loss = loss_bin_node(fwd.claim_prob, y);
      } catch (const NumericalError& e) {
        throw NumericalError(who + " diverged at epoch " + std::to_string(epoch) + " on claim " +
                             tree.claim_id + ": " + e.what());
      }
      epoch_loss += loss->scalar();
      backward(loss);
      adam_step(adam, nodes);
      zero_grad(nodes);
    }
    if (!std::isfinite(epoch_loss)) {
      throw NumericalError(who + " diverged at epoch " + std::to_string(epoch));
    }

    EpochRecord rec;
    rec.stage = 1;
    rec.who = who;
    rec.epoch = epoch;
    rec.loss = epoch_loss;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!val.empty()) {
      const double val_loss = stage1_validation_loss(bank, k, val);
      rec.val_loss = val_loss;
      records.push_back(rec);
      if (stopper.observe(val_loss, params)) break;
    } else {
      records.push_back(rec);
    }
  }
  if (!val.empty()) stopper.restore(params);
}

}  // namespace

std::vector<EpochRecord> train_stage1(ClassifierBank& bank,
                                      const std::vector<PropagationTree>& train,
                                      const std::vector<PropagationTree>& val,
                                      const TrainConfig& cfg) {
  if (train.empty()) throw ContractError("train_stage1: empty training set");
  std::vector<std::vector<EpochRecord>> per_clf(bank.k());
  parallel_for(bank.k(), cfg.parallel, [&](std::size_t k) {
    train_one_classifier(bank, k, train, val, cfg, per_clf[k]);
  });
  std::vector<EpochRecord> records;
  for (auto& r : per_clf) {
    records.insert(records.end(), r.begin(), r.end());
  }
  return records;
}

namespace {

// Frozen per-claim bank outputs used by stage 2: the K claim representations
// and binary veracity probabilities.
struct FrozenClaim {
  std::vector<Tensor> h_claims;
  std::vector<double> claim_probs;
};

FrozenClaim freeze_claim(const ClassifierBank& bank, const PropagationTree& tree) {
  NoGradGuard guard;
  FrozenClaim out;
  out.h_claims.reserve(bank.k());
  out.claim_probs.reserve(bank.k());
  for (const auto& clf : bank.classifiers) {
    ClassifierForward fwd = classifier_forward(clf, tree, bank.cfg.direction);
    out.h_claims.push_back(fwd.h_claim->value);
    out.claim_probs.push_back(fwd.claim_prob->scalar());
  }
  return out;
}

std::vector<NodePtr> stage2_scores(const ClassifierBank& bank, const PropagationTree& tree,
                                   const FrozenClaim& frozen,
                                   std::span<const TargetPair> pairs) {
  NodePtr h_a = encode_sequence(tree.nodes[0].tokens, bank.agg.embedding, bank.agg.enc);
  std::vector<NodePtr> h_claims;
  h_claims.reserve(bank.k());
  for (const auto& hc : frozen.h_claims) h_claims.push_back(constant(hc));
  NodePtr beta = bank_attention(h_a, h_claims);
  return aggregate_veracity_nodes(beta, frozen.claim_probs, pairs, bank.cfg.classes);
}

}  // namespace

std::vector<EpochRecord> train_stage2(ClassifierBank& bank,
                                      const std::vector<PropagationTree>& train,
                                      const std::vector<PropagationTree>& val,
                                      const TrainConfig& cfg) {
  if (train.empty()) throw ContractError("train_stage2: empty training set");
  const auto pairs = enumerate_pairs(bank.cfg.classes);

  // The bank is frozen for the whole stage, so its outputs per claim are
  // computed once.
  std::vector<FrozenClaim> frozen_train(train.size()), frozen_val(val.size());
  parallel_for(train.size(), cfg.parallel,
               [&](std::size_t i) { frozen_train[i] = freeze_claim(bank, train[i]); });
  parallel_for(val.size(), cfg.parallel,
               [&](std::size_t i) { frozen_val[i] = freeze_claim(bank, val[i]); });

  ParamRegistry params = bank.agg.params;
  const auto nodes = params.nodes();
  AdamState adam;
  adam.lr = cfg.lr;
  EarlyStop stopper(cfg.patience);
  std::vector<EpochRecord> records;

  auto validation_loss = [&]() {
    NoGradGuard guard;
    double total = 0.0;
    for (std::size_t i = 0; i < val.size(); ++i) {
      const auto scores = stage2_scores(bank, val[i], frozen_val[i], pairs);
      std::vector<double> values(scores.size());
      for (std::size_t c = 0; c < scores.size(); ++c) values[c] = scores[c]->scalar();
      total += loss_agg_value(values, bank.cfg.classes.index_of(val[i].veracity));
    }
    return total;
  };

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng shuffle_rng(Rng::derive(cfg.seed, "stage2-order", static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t idx : order) {
      const PropagationTree& tree = train[idx];
      NodePtr loss;
      try {
        const auto scores = stage2_scores(bank, tree, frozen_train[idx], pairs);
        loss = loss_agg_node(scores, bank.cfg.classes.index_of(tree.veracity));
      } catch (const NumericalError& e) {
        throw NumericalError(std::string("agg diverged at epoch ") + std::to_string(epoch) +
                             " on claim " + tree.claim_id + ": " + e.what());
      }
      epoch_loss += loss->scalar();
      backward(loss);
      adam_step(adam, nodes);
      zero_grad(nodes);
    }
    if (!std::isfinite(epoch_loss)) {
      throw NumericalError("agg diverged at epoch " + std::to_string(epoch));
    }

    EpochRecord rec;
    rec.stage = 2;
    rec.who = "agg";
    rec.epoch = epoch;
    rec.loss = epoch_loss;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!val.empty()) {
      const double val_loss = validation_loss();
      rec.val_loss = val_loss;
      records.push_back(rec);
      if (stopper.observe(val_loss, params)) break;
    } else {
      records.push_back(rec);
    }
  }
  if (!val.empty()) stopper.restore(params);
  return records;
}

}  // namespace treemil
