#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treemil/checkpoint.hpp"
#include "treemil/dataset.hpp"
#include "treemil/labels.hpp"
#include "treemil/treemodel.hpp"

namespace treemil {

// One veracity-stance target pair; each pair owns one binary classifier.
struct TargetPair {
  Veracity veracity_target;
  Stance stance_target;

  std::string name() const {
    return std::string(1, veracity_char(veracity_target)) + "-" +
           stance_char(stance_target);
  }
};

// Full cross product in the fixed N,T,F,U x S,D,Q,C order: 16 pairs for
// four veracity classes, 12 for three.
std::vector<TargetPair> enumerate_pairs(const VeracitySet& classes);

// 1 iff the claim's veracity equals the pair's veracity target.
int binarize_label(Veracity y, const TargetPair& pair, const VeracitySet& classes);

// One binary classifier: its own embedding table, claim/post encoders, tree
// transition cell, and stance head.
struct BinaryClassifier {
  TargetPair pair;
  NodePtr embedding;  // [V x d], trainable
  GruParams claim_enc;
  GruParams post_enc;
  GruParams tree_cell;
  StanceHead head;
  ParamRegistry params;

  static BinaryClassifier init(const TargetPair& pair, std::size_t index,
                               const Vocabulary& vocab, std::size_t hidden,
                               std::uint64_t seed);
};

// The stage-2 aggregation encoder (theta_a) with its own embedding table.
struct AggregationEncoder {
  NodePtr embedding;
  GruParams enc;
  ParamRegistry params;

  static AggregationEncoder init(const Vocabulary& vocab, std::size_t hidden,
                                 std::uint64_t seed);
};

struct BankConfig {
  Direction direction = Direction::TD;
  VeracitySet classes = VeracitySet::ntfu();
  std::size_t hidden = 100;
  std::uint64_t seed = 1;
};

// The K = N_r x N_s binary classifiers plus the aggregation encoder.
struct ClassifierBank {
  BankConfig cfg;
  std::vector<BinaryClassifier> classifiers;
  AggregationEncoder agg;

  static ClassifierBank init(const BankConfig& cfg, const Vocabulary& vocab);

  std::size_t k() const { return classifiers.size(); }
  ParamRegistry stage1_params() const;  // all classifier parameters
  ParamRegistry all_params() const;     // classifiers + aggregation encoder
};

// Forward pass of one classifier over one tree.
struct ClassifierForward {
  NodePtr h_claim;                  // claim representation from this classifier
  std::vector<NodePtr> raw_stance;  // p_j per node
  NodePtr claim_prob;               // binary veracity probability
  std::vector<AttnRecord> attention;
};

ClassifierForward classifier_forward(const BinaryClassifier& clf, const PropagationTree& tree,
                                     Direction direction);

// Classifier attention (beta) over dot(h_a, h_c^k), as a graph node.
NodePtr bank_attention(const NodePtr& h_a, std::span<const NodePtr> h_claims);

// Plain softmax used on the evaluation path; matches bank_attention values.
std::vector<double> softmax_values(std::span<const double> logits);

// Regrouped multi-class scores: weighted sums of the binary outputs of the
// classifiers targeting each class. Unnormalized convex-combination
// fragments; renormalize_distribution is display-only and argmax-preserving.
std::array<double, kNumStances> aggregate_stance(std::span<const double> p_k,
                                                 std::span<const TargetPair> pairs,
                                                 std::span<const double> beta);
std::vector<double> aggregate_veracity(std::span<const double> y_k,
                                       std::span<const TargetPair> pairs,
                                       std::span<const double> beta,
                                       const VeracitySet& classes);

// Graph version for the stage-2 loss: the frozen binary outputs enter as
// constants, beta carries the gradient.
std::vector<NodePtr> aggregate_veracity_nodes(const NodePtr& beta, std::span<const double> y_k,
                                              std::span<const TargetPair> pairs,
                                              const VeracitySet& classes);

Stance argmax_stance(const std::array<double, kNumStances>& scores);
Veracity argmax_veracity(std::span<const double> scores, const VeracitySet& classes);
std::vector<double> renormalize_distribution(std::span<const double> scores);

// Joint prediction for one claim, produced without gradients.
struct PostPrediction {
  std::string post_id;
  std::array<double, kNumStances> stance_scores;  // renormalized
  Stance pred;
  std::optional<Stance> gold;
};

struct ClaimPrediction {
  std::string claim_id;
  Veracity gold;
  std::vector<double> veracity_scores;  // over the class set, renormalized
  Veracity pred;
  std::vector<double> beta;
  std::vector<double> raw_claim_probs;           // binary veracity prob per classifier
  std::vector<std::vector<double>> raw_stance;   // [K][nodes]
  std::vector<PostPrediction> posts;             // node 0 included
  std::vector<std::vector<AttnRecord>> attention;  // per classifier, when requested
  std::vector<double> bank_attention_weights;      // beta again, as an AttnRecord-style dump
};

ClaimPrediction predict_claim(const ClassifierBank& bank, const PropagationTree& tree,
                              bool keep_attention = false);

}  // namespace treemil
