#include "treemil/synth.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace treemil {

namespace {

constexpr const char* kStanceNames = "SDQC";

void check_distribution(std::span<const double> row, const std::string& what) {
  double sum = 0.0;
  for (double p : row) {
    if (p < 0.0) throw ConfigError(what + ": negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError(what + ": probabilities sum to " + std::to_string(sum) + ", expected 1");
  }
}

std::vector<std::string> make_lexicon(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%02zu", prefix.c_str(), i);
    out.emplace_back(buf);
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  if (claims_per_class == 0) throw ConfigError("claims_per_class must be positive");
  if (classes.size() == 0) throw ConfigError("veracity class set is empty");
  if (tree_size_min == 0 || tree_size_min > tree_size_max) {
    throw ConfigError("invalid tree size range");
  }
  if (post_len_min == 0 || post_len_min > post_len_max) {
    throw ConfigError("invalid post length range");
  }
  if (noise_rate < 0.0 || noise_rate > 1.0) throw ConfigError("noise_rate must be in [0,1]");
  for (Veracity v : classes.classes) {
    const int vi = static_cast<int>(v);
    check_distribution(root_stance[vi], std::string("root_stance[") + veracity_char(v) + "]");
    for (std::size_t s = 0; s < kNumStances; ++s) {
      check_distribution(transition[vi][s], std::string("transition[") + veracity_char(v) +
                                                "][" + kStanceNames[s] + "]");
    }
  }
  for (std::size_t s = 0; s < kNumStances; ++s) {
    if (lexicons[s].empty()) {
      throw ConfigError(std::string("lexicon for stance ") + kStanceNames[s] + " is empty");
    }
  }
}

SynthConfig SynthConfig::defaults() {
  SynthConfig cfg;
  cfg.lexicons = {make_lexicon("sup", 24), make_lexicon("den", 24), make_lexicon("que", 24),
                  make_lexicon("com", 24)};

  auto set_root = [&cfg](Veracity v, std::array<double, 4> d) {
    cfg.root_stance[static_cast<int>(v)] = d;
  };
  auto set_trans = [&cfg](Veracity v, std::array<std::array<double, 4>, 4> m) {
    cfg.transition[static_cast<int>(v)] = m;
  };

  // Rows and columns follow the S, D, Q, C order. Non-rumors are dominated
  // by comments; true rumors by supportive chains; false rumors by denials
  // with deny<->support exchanges; unverified rumors by questioning and
  // comment->question edges.
  set_root(Veracity::N, {0.10, 0.05, 0.10, 0.75});
  set_root(Veracity::T, {0.75, 0.05, 0.10, 0.10});
  set_root(Veracity::F, {0.15, 0.65, 0.10, 0.10});
  set_root(Veracity::U, {0.10, 0.05, 0.70, 0.15});

  set_trans(Veracity::N, {{{0.20, 0.05, 0.05, 0.70},
                           {0.05, 0.15, 0.05, 0.75},
                           {0.05, 0.05, 0.15, 0.75},
                           {0.10, 0.05, 0.10, 0.75}}});
  set_trans(Veracity::T, {{{0.60, 0.05, 0.05, 0.30},
                           {0.15, 0.55, 0.05, 0.25},
                           {0.35, 0.05, 0.15, 0.45},
                           {0.35, 0.05, 0.10, 0.50}}});
  set_trans(Veracity::F, {{{0.25, 0.45, 0.10, 0.20},
                           {0.40, 0.35, 0.05, 0.20},
                           {0.10, 0.45, 0.15, 0.30},
                           {0.10, 0.45, 0.10, 0.35}}});
  set_trans(Veracity::U, {{{0.20, 0.05, 0.45, 0.30},
                           {0.10, 0.15, 0.45, 0.30},
                           {0.10, 0.05, 0.40, 0.45},
                           {0.05, 0.05, 0.40, 0.50}}});
  return cfg;
}

SynthConfig SynthConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid synth config JSON: ") + e.what());
  }
  SynthConfig cfg = defaults();
  try {
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("claims_per_class")) {
      cfg.claims_per_class = j["claims_per_class"].get<std::size_t>();
    }
    if (j.contains("veracity_classes")) {
      cfg.classes = VeracitySet::parse(j["veracity_classes"].get<std::string>());
    }
    if (j.contains("tree_size_min")) cfg.tree_size_min = j["tree_size_min"].get<std::size_t>();
    if (j.contains("tree_size_max")) cfg.tree_size_max = j["tree_size_max"].get<std::size_t>();
    if (j.contains("post_len_min")) cfg.post_len_min = j["post_len_min"].get<std::size_t>();
    if (j.contains("post_len_max")) cfg.post_len_max = j["post_len_max"].get<std::size_t>();
    if (j.contains("noise_rate")) cfg.noise_rate = j["noise_rate"].get<double>();
    if (j.contains("lexicon_size")) {
      const auto n = j["lexicon_size"].get<std::size_t>();
      cfg.lexicons = {make_lexicon("sup", n), make_lexicon("den", n), make_lexicon("que", n),
                      make_lexicon("com", n)};
    }
    if (j.contains("lexicons")) {
      for (std::size_t s = 0; s < kNumStances; ++s) {
        const std::string key(1, kStanceNames[s]);
        if (j["lexicons"].contains(key)) {
          cfg.lexicons[s] = j["lexicons"][key].get<std::vector<std::string>>();
        }
      }
    }
    if (j.contains("root_stance")) {
      for (auto& [key, val] : j["root_stance"].items()) {
        const int vi = static_cast<int>(parse_veracity(key));
        cfg.root_stance[vi] = val.get<std::array<double, 4>>();
      }
    }
    if (j.contains("transitions")) {
      for (auto& [key, val] : j["transitions"].items()) {
        const int vi = static_cast<int>(parse_veracity(key));
        cfg.transition[vi] = val.get<std::array<std::array<double, 4>, 4>>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad synth config field: ") + e.what());
  }
  return cfg;
}

std::string SynthConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["claims_per_class"] = claims_per_class;
  j["veracity_classes"] = classes.name();
  j["tree_size_min"] = tree_size_min;
  j["tree_size_max"] = tree_size_max;
  j["post_len_min"] = post_len_min;
  j["post_len_max"] = post_len_max;
  j["noise_rate"] = noise_rate;
  nlohmann::ordered_json lex = nlohmann::ordered_json::object();
  for (std::size_t s = 0; s < kNumStances; ++s) lex[std::string(1, kStanceNames[s])] = lexicons[s];
  j["lexicons"] = std::move(lex);
  nlohmann::ordered_json roots = nlohmann::ordered_json::object();
  nlohmann::ordered_json trans = nlohmann::ordered_json::object();
  for (Veracity v : classes.classes) {
    const std::string key(1, veracity_char(v));
    roots[key] = root_stance[static_cast<int>(v)];
    trans[key] = transition[static_cast<int>(v)];
  }
  j["root_stance"] = std::move(roots);
  j["transitions"] = std::move(trans);
  return j.dump(2);
}

std::vector<PropagationTree> generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(Rng::derive(cfg.seed, "synthetic-data"));

  auto draw_token = [&](Stance s) -> const std::string& {
    std::size_t si = static_cast<std::size_t>(s);
    if (cfg.noise_rate > 0.0 && rng.uniform() < cfg.noise_rate) {
      // Substitute from one of the other stance lexicons.
      std::size_t other = rng.index(kNumStances - 1);
      if (other >= si) ++other;
      si = other;
    }
    const auto& lex = cfg.lexicons[si];
    return lex[rng.index(lex.size())];
  };

  auto make_text = [&](Stance s, std::size_t len) {
    std::string text;
    for (std::size_t i = 0; i < len; ++i) {
      if (i) text += ' ';
      text += draw_token(s);
    }
    return text;
  };

  std::vector<PropagationTree> trees;
  trees.reserve(cfg.classes.size() * cfg.claims_per_class);
  for (Veracity v : cfg.classes.classes) {
    const int vi = static_cast<int>(v);
    for (std::size_t c = 0; c < cfg.claims_per_class; ++c) {
      PropagationTree tree;
      char idbuf[64];
      std::snprintf(idbuf, sizeof(idbuf), "claim-%c-%04zu", veracity_char(v), c);
      tree.claim_id = idbuf;
      tree.veracity = v;

      const std::size_t size =
          cfg.tree_size_min + rng.index(cfg.tree_size_max - cfg.tree_size_min + 1);
      std::vector<Stance> stances(size);
      stances[0] = static_cast<Stance>(rng.categorical(cfg.root_stance[vi]));

      for (std::size_t i = 0; i < size; ++i) {
        PostNode node;
        node.post_id = tree.claim_id + "-p" + std::to_string(i);
        if (i > 0) {
          const std::size_t parent = rng.index(i);
          node.parent = static_cast<int>(parent);
          stances[i] = static_cast<Stance>(
              rng.categorical(cfg.transition[vi][static_cast<std::size_t>(stances[parent])]));
        }
        const std::size_t len =
            cfg.post_len_min + rng.index(cfg.post_len_max - cfg.post_len_min + 1);
        node.text = make_text(stances[i], len);
        node.gold_stance = stances[i];
        tree.nodes.push_back(std::move(node));
      }
      tree.validate();
      trees.push_back(std::move(tree));
    }
  }
  return trees;
}

}  // namespace treemil
