#include "treemil/milbank.hpp"

#include <algorithm>
#include <cmath>

#include "treemil/errors.hpp"

namespace treemil {

std::vector<TargetPair> enumerate_pairs(const VeracitySet& classes) {
  std::vector<TargetPair> pairs;
  pairs.reserve(classes.size() * kNumStances);
  for (Veracity v : classes.classes) {
    for (Stance s : kAllStances) pairs.push_back({v, s});
  }
  return pairs;
}

int binarize_label(Veracity y, const TargetPair& pair, const VeracitySet& classes) {
  if (!classes.contains(y)) {
    throw ContractError(std::string("label ") + veracity_char(y) + " not in corpus class set " +
                        classes.name());
  }
  return y == pair.veracity_target ? 1 : 0;
}

BinaryClassifier BinaryClassifier::init(const TargetPair& pair, std::size_t index,
                                        const Vocabulary& vocab, std::size_t hidden,
                                        std::uint64_t seed) {
  BinaryClassifier clf;
  clf.pair = pair;
  clf.embedding = parameter(vocab.embedding());
  Rng rng(Rng::derive(seed, "classifier", index));
  const std::size_t d = vocab.embed_dim();
  clf.claim_enc = GruParams::init(d, hidden, rng);
  clf.post_enc = GruParams::init(d, hidden, rng);
  clf.tree_cell = GruParams::init(hidden, hidden, rng);
  clf.head = StanceHead::init(hidden, rng);

  const std::string prefix = "clf" + std::to_string(index);
  clf.params.add(prefix + ".embed", clf.embedding);
  clf.claim_enc.register_into(clf.params, prefix + ".claim_enc");
  clf.post_enc.register_into(clf.params, prefix + ".post_enc");
  clf.tree_cell.register_into(clf.params, prefix + ".tree");
  clf.head.register_into(clf.params, prefix + ".head");
  return clf;
}

AggregationEncoder AggregationEncoder::init(const Vocabulary& vocab, std::size_t hidden,
                                            std::uint64_t seed) {
  AggregationEncoder agg;
  agg.embedding = parameter(vocab.embedding());
  Rng rng(Rng::derive(seed, "aggregation-encoder"));
  agg.enc = GruParams::init(vocab.embed_dim(), hidden, rng);
  agg.params.add("agg.embed", agg.embedding);
  agg.enc.register_into(agg.params, "agg.enc");
  return agg;
}

ClassifierBank ClassifierBank::init(const BankConfig& cfg, const Vocabulary& vocab) {
  ClassifierBank bank;
  bank.cfg = cfg;
  const auto pairs = enumerate_pairs(cfg.classes);
  bank.classifiers.reserve(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    bank.classifiers.push_back(
        BinaryClassifier::init(pairs[k], k, vocab, cfg.hidden, cfg.seed));
  }
  bank.agg = AggregationEncoder::init(vocab, cfg.hidden, cfg.seed);
  return bank;
}

ParamRegistry ClassifierBank::stage1_params() const {
  ParamRegistry reg;
  for (const auto& clf : classifiers) reg.extend(clf.params);
  return reg;
}

ParamRegistry ClassifierBank::all_params() const {
  ParamRegistry reg = stage1_params();
  reg.extend(agg.params);
  return reg;
}

ClassifierForward classifier_forward(const BinaryClassifier& clf, const PropagationTree& tree,
                                     Direction direction) {
  ClassifierForward fwd;
  const std::size_t n = tree.size();
  std::vector<NodePtr> inputs(n);
  fwd.h_claim = encode_sequence(tree.nodes[0].tokens, clf.embedding, clf.claim_enc);
  inputs[0] = fwd.h_claim;
  for (std::size_t i = 1; i < n; ++i) {
    inputs[i] = encode_sequence(tree.nodes[i].tokens, clf.embedding, clf.post_enc);
  }

  if (direction == Direction::BU) {
    auto ctx = bu_contexts(tree, inputs, clf.tree_cell);
    BuResult r = bu_aggregate(tree, ctx, fwd.h_claim, clf.head);
    fwd.raw_stance = std::move(r.raw_stance);
    fwd.claim_prob = std::move(r.claim_prob);
    fwd.attention = std::move(r.attention);
  } else {
    auto ctx = td_contexts(tree, inputs, clf.tree_cell);
    TdResult r = td_aggregate(tree, ctx, fwd.h_claim, clf.head);
    fwd.raw_stance = std::move(r.raw_stance);
    fwd.claim_prob = std::move(r.claim_prob);
    fwd.attention = std::move(r.attention);
  }
  return fwd;
}

NodePtr bank_attention(const NodePtr& h_a, std::span<const NodePtr> h_claims) {
  std::vector<NodePtr> logits;
  logits.reserve(h_claims.size());
  for (const auto& hc : h_claims) logits.push_back(dot(h_a, hc));
  return softmax(concat(logits));
}

std::vector<double> softmax_values(std::span<const double> logits) {
  if (logits.empty()) throw DimensionError("softmax_values: empty input");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

std::array<double, kNumStances> aggregate_stance(std::span<const double> p_k,
                                                 std::span<const TargetPair> pairs,
                                                 std::span<const double> beta) {
  if (p_k.size() != pairs.size() || beta.size() != pairs.size()) {
    throw ContractError("aggregate_stance: misaligned inputs");
  }
  std::array<double, kNumStances> out{};
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out[static_cast<std::size_t>(pairs[k].stance_target)] += beta[k] * p_k[k];
  }
  return out;
}

std::vector<double> aggregate_veracity(std::span<const double> y_k,
                                       std::span<const TargetPair> pairs,
                                       std::span<const double> beta,
                                       const VeracitySet& classes) {
  if (y_k.size() != pairs.size() || beta.size() != pairs.size()) {
    throw ContractError("aggregate_veracity: misaligned inputs");
  }
  std::vector<double> out(classes.size(), 0.0);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out[classes.index_of(pairs[k].veracity_target)] += beta[k] * y_k[k];
  }
  return out;
}

std::vector<NodePtr> aggregate_veracity_nodes(const NodePtr& beta, std::span<const double> y_k,
                                              std::span<const TargetPair> pairs,
                                              const VeracitySet& classes) {
  std::vector<NodePtr> out(classes.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    NodePtr term = scale(pick(beta, k), y_k[k]);
    const std::size_t c = classes.index_of(pairs[k].veracity_target);
    out[c] = out[c] ? add(out[c], term) : term;
  }
  return out;
}

Stance argmax_stance(const std::array<double, kNumStances>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;  // ties keep the S<D<Q<C order
  }
  return static_cast<Stance>(best);
}

Veracity argmax_veracity(std::span<const double> scores, const VeracitySet& classes) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;  // ties keep the N<T<F<U order
  }
  return classes.classes[best];
}

std::vector<double> renormalize_distribution(std::span<const double> scores) {
  double sum = 0.0;
  for (double v : scores) sum += v;
  std::vector<double> out(scores.begin(), scores.end());
  if (sum > 0.0) {
    for (double& v : out) v /= sum;
  } else if (!out.empty()) {
    for (double& v : out) v = 1.0 / static_cast<double>(out.size());
  }
  return out;
}

ClaimPrediction predict_claim(const ClassifierBank& bank, const PropagationTree& tree,
                              bool keep_attention) {
  NoGradGuard guard;
  const auto pairs = enumerate_pairs(bank.cfg.classes);
  const std::size_t K = bank.k();
  const std::size_t n = tree.size();

  ClaimPrediction out;
  out.claim_id = tree.claim_id;
  out.gold = tree.veracity;
  out.raw_claim_probs.resize(K);
  out.raw_stance.assign(K, std::vector<double>(n));

  std::vector<Tensor> h_claims(K);
  for (std::size_t k = 0; k < K; ++k) {
    ClassifierForward fwd = classifier_forward(bank.classifiers[k], tree, bank.cfg.direction);
    out.raw_claim_probs[k] = fwd.claim_prob->scalar();
    for (std::size_t i = 0; i < n; ++i) out.raw_stance[k][i] = fwd.raw_stance[i]->scalar();
    if (keep_attention) out.attention.push_back(std::move(fwd.attention));
    h_claims[k] = fwd.h_claim->value;
  }

  NodePtr h_a = encode_sequence(tree.nodes[0].tokens, bank.agg.embedding, bank.agg.enc);
  std::vector<double> attn_logits(K);
  for (std::size_t k = 0; k < K; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < h_a->value.size(); ++j) acc += h_a->value[j] * h_claims[k][j];
    attn_logits[k] = acc;
  }
  out.beta = softmax_values(attn_logits);
  out.bank_attention_weights = out.beta;

  const auto y_scores = aggregate_veracity(out.raw_claim_probs, pairs, out.beta,
                                           bank.cfg.classes);
  out.pred = argmax_veracity(y_scores, bank.cfg.classes);
  out.veracity_scores = renormalize_distribution(y_scores);

  out.posts.reserve(n);
  std::vector<double> column(K);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < K; ++k) column[k] = out.raw_stance[k][i];
    const auto s_scores = aggregate_stance(column, pairs, out.beta);
    PostPrediction pp;
    pp.post_id = tree.nodes[i].post_id;
    pp.pred = argmax_stance(s_scores);
    const auto renorm = renormalize_distribution(s_scores);
    std::copy(renorm.begin(), renorm.end(), pp.stance_scores.begin());
    pp.gold = tree.nodes[i].gold_stance;
    out.posts.push_back(std::move(pp));
  }
  return out;
}

}  // namespace treemil
