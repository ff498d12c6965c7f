#include "treemil/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace treemil {

std::vector<std::vector<int>> PropagationTree::children() const {
  std::vector<std::vector<int>> out(nodes.size());
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    out[*nodes[i].parent].push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> PropagationTree::leaves() const {
  std::vector<bool> has_child(nodes.size(), false);
  for (std::size_t i = 1; i < nodes.size(); ++i) has_child[*nodes[i].parent] = true;
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!has_child[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> PropagationTree::path_from_root(int l) const {
  std::vector<int> path;
  int cur = l;
  while (true) {
    path.push_back(cur);
    if (!nodes[cur].parent) break;
    cur = *nodes[cur].parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

void PropagationTree::validate() const {
  if (nodes.empty()) {
    throw StructureError("tree '" + claim_id + "' has no nodes");
  }
  if (nodes[0].parent) {
    throw StructureError("tree '" + claim_id + "': node 0 must be the parentless claim");
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!nodes[i].parent) {
      throw StructureError("tree '" + claim_id + "': node " + std::to_string(i) +
                           " is a second root");
    }
    const int p = *nodes[i].parent;
    if (p < 0 || static_cast<std::size_t>(p) >= i) {
      throw StructureError("tree '" + claim_id + "': node " + std::to_string(i) +
                           " references parent " + std::to_string(p) +
                           " which is not an earlier node");
    }
  }
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

Vocabulary Vocabulary::build(const std::vector<PropagationTree>& trees, std::size_t embed_dim,
                             std::uint64_t seed) {
  Vocabulary v;
  v.id_to_token_ = {"<pad>", "<unk>", "<empty>"};
  for (std::size_t i = 0; i < v.id_to_token_.size(); ++i) {
    v.token_to_id_[v.id_to_token_[i]] = static_cast<int>(i);
  }
  for (const auto& tree : trees) {
    for (const auto& node : tree.nodes) {
      for (auto& w : split_words(node.text)) {
        if (v.token_to_id_.emplace(w, static_cast<int>(v.id_to_token_.size())).second) {
          v.id_to_token_.push_back(w);
        }
      }
    }
  }
  Rng rng(Rng::derive(seed, "vocab-embedding"));
  v.embedding_ = Tensor::uniform(Shape{v.id_to_token_.size(), embed_dim}, rng, -0.1, 0.1);
  for (std::size_t j = 0; j < embed_dim; ++j) v.embedding_.at(kPadToken, j) = 0.0;
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens,
                                   std::size_t embed_dim) {
  Vocabulary v;
  v.id_to_token_ = tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) v.token_to_id_[tokens[i]] = static_cast<int>(i);
  v.embedding_ = Tensor(Shape{tokens.size(), embed_dim});
  return v;
}

void Vocabulary::load_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file: " + path.string());
  std::size_t count = 0, dim = 0;
  if (!(in >> count >> dim)) throw ParseError("embedding file missing 'V d' header");
  if (dim != embed_dim()) {
    throw ConfigError("embedding file dimension " + std::to_string(dim) +
                      " does not match configured " + std::to_string(embed_dim()));
  }
  for (std::size_t r = 0; r < count; ++r) {
    std::string token;
    if (!(in >> token)) throw ParseError("embedding file truncated at row " + std::to_string(r));
    std::vector<double> row(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      if (!(in >> row[j])) {
        throw ParseError("embedding file truncated in row for token '" + token + "'");
      }
    }
    auto it = token_to_id_.find(token);
    if (it == token_to_id_.end()) continue;
    for (std::size_t j = 0; j < dim; ++j) embedding_.at(it->second, j) = row[j];
  }
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkToken : it->second;
}

std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab) {
  std::vector<int> ids;
  for (const auto& w : split_words(text)) ids.push_back(vocab.id_of(w));
  if (ids.empty()) ids.push_back(kEmptyToken);
  return ids;
}

void tokenize_trees(std::vector<PropagationTree>& trees, const Vocabulary& vocab) {
  for (auto& tree : trees) {
    for (auto& node : tree.nodes) node.tokens = tokenize(node.text, vocab);
  }
}

Tensor embed(const std::vector<int>& tokens, const Vocabulary& vocab) {
  const std::size_t d = vocab.embed_dim();
  Tensor out(Shape{tokens.size(), d});
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int id = tokens[i];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
      throw DimensionError("embed: token id " + std::to_string(id) + " out of range for V=" +
                           std::to_string(vocab.size()));
    }
    for (std::size_t j = 0; j < d; ++j) out.at(i, j) = vocab.embedding().at(id, j);
  }
  return out;
}

namespace {

// Removes retweet-style posts (text identical to the claim), reattaching
// children to the dropped node's parent and reindexing.
void drop_retweets(PropagationTree& tree) {
  const std::string& claim_text = tree.nodes[0].text;
  bool any = false;
  for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].text == claim_text) {
      any = true;
      break;
    }
  }
  if (!any) return;

  std::vector<int> remap(tree.nodes.size(), -1);
  std::vector<PostNode> kept;
  kept.reserve(tree.nodes.size());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    PostNode& node = tree.nodes[i];
    if (i > 0 && node.text == claim_text) continue;
    if (node.parent) {
      int p = *node.parent;
      // Walk up past dropped ancestors; the claim (index 0) is never dropped.
      while (remap[p] < 0) p = *tree.nodes[p].parent;
      node.parent = remap[p];
    }
    remap[i] = static_cast<int>(kept.size());
    kept.push_back(std::move(node));
  }
  tree.nodes = std::move(kept);
}

std::optional<std::string> stance_to_json(const std::optional<Stance>& s) {
  if (!s) return std::nullopt;
  return std::string(1, stance_char(*s));
}

}  // namespace

std::string dataset_record_to_json(const PropagationTree& tree) {
  nlohmann::ordered_json j;
  j["claim_id"] = tree.claim_id;
  j["veracity"] = std::string(1, veracity_char(tree.veracity));
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const auto& node : tree.nodes) {
    nlohmann::ordered_json n;
    n["id"] = node.post_id;
    if (node.parent) {
      n["parent"] = *node.parent;
    } else {
      n["parent"] = nullptr;
    }
    n["text"] = node.text;
    if (auto s = stance_to_json(node.gold_stance)) {
      n["stance"] = *s;
    } else {
      n["stance"] = nullptr;
    }
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  return j.dump();
}

PropagationTree dataset_record_from_json(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
  }
  try {
    PropagationTree tree;
    tree.claim_id = j.at("claim_id").get<std::string>();
    tree.veracity = parse_veracity(j.at("veracity").get<std::string>());
    for (const auto& n : j.at("nodes")) {
      PostNode node;
      node.post_id = n.at("id").get<std::string>();
      if (!n.at("parent").is_null()) node.parent = n.at("parent").get<int>();
      node.text = n.at("text").get<std::string>();
      if (n.contains("stance") && !n.at("stance").is_null()) {
        node.gold_stance = parse_stance(n.at("stance").get<std::string>());
      }
      tree.nodes.push_back(std::move(node));
    }
    return tree;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("line " + std::to_string(line_no) + ": bad record: " + e.what());
  } catch (const ContractError& e) {
    throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
  }
}

std::vector<PropagationTree> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path.string());
  std::vector<PropagationTree> trees;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    PropagationTree tree = dataset_record_from_json(line, line_no);
    try {
      tree.validate();
    } catch (const StructureError& e) {
      throw StructureError(std::string(e.what()) + " (line " + std::to_string(line_no) + ")");
    }
    drop_retweets(tree);
    trees.push_back(std::move(tree));
  }
  return trees;
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<PropagationTree>& trees) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open dataset for writing: " + path.string());
  for (const auto& tree : trees) out << dataset_record_to_json(tree) << "\n";
  if (!out) throw IoError("failed while writing dataset: " + path.string());
}

std::pair<std::vector<PropagationTree>, std::vector<PropagationTree>> split_holdout(
    const std::vector<PropagationTree>& trees, double holdout_fraction, std::uint64_t seed) {
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0) {
    throw ConfigError("holdout fraction must be in [0, 1)");
  }
  std::vector<std::size_t> idx(trees.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(Rng::derive(seed, "holdout-split"));
  rng.shuffle(idx);
  const std::size_t n_val = static_cast<std::size_t>(trees.size() * holdout_fraction);
  std::vector<PropagationTree> train, val;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    (i < n_val ? val : train).push_back(trees[idx[i]]);
  }
  return {std::move(train), std::move(val)};
}

}  // namespace treemil
