#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "treemil/labels.hpp"
#include "treemil/rng.hpp"
#include "treemil/tensor.hpp"

namespace treemil {

// One post in a propagation tree. Node 0 is always the claim itself.
struct PostNode {
  std::string post_id;
  std::optional<int> parent;  // index into the owning tree's node list
  std::string text;
  std::vector<int> tokens;  // filled by tokenize_trees; empty before that
  std::optional<Stance> gold_stance;
};

// A claim plus its responsive posts: the MIL bag and its instances. Parent
// indices always point to earlier nodes, so index order is a topological
// order (ascending = parents first, descending = children first).
struct PropagationTree {
  std::string claim_id;
  Veracity veracity = Veracity::N;
  std::vector<PostNode> nodes;

  std::size_t size() const { return nodes.size(); }
  const PostNode& claim() const { return nodes.front(); }

  // Children lists indexed by node.
  std::vector<std::vector<int>> children() const;
  // Nodes with no children; for a single-node tree the root is the one leaf.
  std::vector<int> leaves() const;
  // Node indices from the root to l, inclusive of both.
  std::vector<int> path_from_root(int l) const;

  // Throws StructureError if the invariants do not hold.
  void validate() const;
};

// Reserved vocabulary rows.
constexpr int kPadToken = 0;
constexpr int kUnkToken = 1;
constexpr int kEmptyToken = 2;

// Token ids plus the initial embedding matrix. Immutable once built; the
// trainable copies live inside the classifiers.
class Vocabulary {
 public:
  // Builds from the training split: lowercased, split on anything that is
  // not alphanumeric. Embeddings are seeded uniform in [-0.1, 0.1] except
  // the PAD row, which stays zero.
  static Vocabulary build(const std::vector<PropagationTree>& trees, std::size_t embed_dim,
                          std::uint64_t seed);
  // Rebuilds from an explicit token list (checkpoint restore). Embedding
  // matrix is left zero; callers restore the trained rows afterwards.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens, std::size_t embed_dim);

  // Overwrites rows for tokens found in an embedding file ("V d" header,
  // then one token + d floats per line).
  void load_embedding_file(const std::filesystem::path& path);

  std::size_t size() const { return id_to_token_.size(); }
  std::size_t embed_dim() const { return embedding_.dim(1); }
  const Tensor& embedding() const { return embedding_; }
  const std::vector<std::string>& tokens() const { return id_to_token_; }
  int id_of(const std::string& token) const;  // kUnkToken when absent

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
  Tensor embedding_;  // [V x d]
};

// Lowercase + split on non-alphanumeric, then map through the vocabulary.
// Empty results become [EMPTY]; OOV words become UNK. Total function.
std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab);
std::vector<std::string> split_words(const std::string& text);

// Fills node.tokens for every node of every tree.
void tokenize_trees(std::vector<PropagationTree>& trees, const Vocabulary& vocab);

// Embeds a token sequence as a [n x d] matrix of rows from the vocabulary's
// initial embedding (no gradients; the trainable path goes through the
// classifiers' own tables).
Tensor embed(const std::vector<int>& tokens, const Vocabulary& vocab);

// Line-delimited JSON records; see the README for the schema. Validates all
// structural invariants and drops retweet-style posts whose text equals the
// claim verbatim (their children are reattached to the dropped node's
// parent).
std::vector<PropagationTree> load_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const std::vector<PropagationTree>& trees);
std::string dataset_record_to_json(const PropagationTree& tree);
PropagationTree dataset_record_from_json(const std::string& line, std::size_t line_no);

// Seeded split into (train, validation) with the given holdout fraction.
std::pair<std::vector<PropagationTree>, std::vector<PropagationTree>> split_holdout(
    const std::vector<PropagationTree>& trees, double holdout_fraction, std::uint64_t seed);

}  // namespace treemil
