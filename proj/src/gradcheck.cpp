#include "treemil/gradcheck.hpp"

#include <cmath>

#include "treemil/dataset.hpp"
#include "treemil/encoder.hpp"
#include "treemil/milbank.hpp"
#include "treemil/synth.hpp"
#include "treemil/training.hpp"
#include "treemil/treemodel.hpp"

namespace treemil {

double finite_diff_max_rel_error(const std::function<NodePtr()>& build_loss,
                                 std::span<const NodePtr> params, double eps) {
  NodePtr loss = build_loss();
  backward(loss);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p->grad);
  zero_grad(params);

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Node& p = *params[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + eps;
      const double up = build_loss()->scalar();
      p.value[i] = saved - eps;
      const double down = build_loss()->scalar();
      p.value[i] = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double ad = analytic[pi][i];
      const double denom = std::max({std::abs(fd), std::abs(ad), 1e-8});
      worst = std::max(worst, std::abs(fd - ad) / denom);
    }
  }
  return worst;
}

namespace {

NodePtr random_param(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return parameter(Tensor::uniform(std::move(shape), rng, lo, hi));
}

// Reduces any-shaped output to a scalar through fixed random weights so all
// output entries receive distinct gradient signal.
NodePtr weigh(const NodePtr& out, const Tensor& weights) {
  return sum(mul(out, constant(weights)));
}

// A deliberately broken tanh: forward is exact, backward is scaled by 1.01.
// Used as the negative control for the gradient checker itself.
NodePtr corrupted_tanh(const NodePtr& x) {
  Tensor out = x->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  auto n = std::make_shared<Node>();
  n->op = "corrupted_tanh";
  n->requires_grad = x->requires_grad;
  if (n->requires_grad) {
    n->parents = {x};
    n->grad = Tensor::zeros_like(out);
    n->backprop = [](Node& self) {
      Node& p = *self.parents[0];
      for (std::size_t i = 0; i < p.grad.size(); ++i) {
        const double y = self.value[i];
        p.grad[i] += 1.01 * self.grad[i] * (1.0 - y * y);
      }
    };
  }
  n->value = std::move(out);
  return n;
}

struct OpCase {
  std::string name;
  // Creates parameters and returns a loss builder over them.
  std::function<std::vector<NodePtr>(Rng&, std::function<NodePtr()>&)> setup;
};

double run_case(const OpCase& c, std::uint64_t seed, int instances) {
  double worst = 0.0;
  for (int t = 0; t < instances; ++t) {
    Rng rng(Rng::derive(seed, c.name, static_cast<std::uint64_t>(t)));
    std::function<NodePtr()> build;
    std::vector<NodePtr> params = c.setup(rng, build);
    worst = std::max(worst, finite_diff_max_rel_error(build, params));
  }
  return worst;
}

// Builds a tiny model + 4-node tree and returns the end-to-end binary loss.
struct EndToEndFixture {
  std::vector<PropagationTree> trees;
  Vocabulary vocab;
  BinaryClassifier clf;
  Direction direction;

  static EndToEndFixture make(Direction dir, std::uint64_t seed, int instance) {
    SynthConfig scfg = SynthConfig::defaults();
    scfg.seed = Rng::derive(seed, "gradcheck-tree", static_cast<std::uint64_t>(instance));
    scfg.claims_per_class = 1;
    scfg.classes = VeracitySet{{Veracity::F}};
    scfg.tree_size_min = 4;
    scfg.tree_size_max = 4;
    scfg.post_len_min = 2;
    scfg.post_len_max = 3;

    EndToEndFixture fx{generate_synthetic(scfg),
                       Vocabulary(),
                       BinaryClassifier(),
                       dir};
    fx.vocab = Vocabulary::build(fx.trees, /*embed_dim=*/5, scfg.seed);
    tokenize_trees(fx.trees, fx.vocab);
    fx.clf = BinaryClassifier::init({Veracity::F, Stance::D}, 0, fx.vocab, /*hidden=*/6,
                                    scfg.seed);
    return fx;
  }

  NodePtr loss() const {
    ClassifierForward fwd = classifier_forward(clf, trees[0], direction);
    return loss_bin_node(fwd.claim_prob, 1);
  }
};

}  // namespace

std::vector<GradCheckEntry> run_gradient_suite(std::uint64_t seed, bool inject_fault,
                                               int instances_per_op) {
  std::vector<OpCase> cases;

  cases.push_back({"matmul", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({3, 4}, rng);
    auto b = random_param({4, 2}, rng);
    auto w = Tensor::uniform({3, 2}, rng, -1.0, 1.0);
    build = [=] { return weigh(matmul(a, b), w); };
    return std::vector<NodePtr>{a, b};
  }});
  cases.push_back({"matmul_vec_mat", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({4}, rng);
    auto b = random_param({4, 3}, rng);
    auto w = Tensor::uniform({3}, rng, -1.0, 1.0);
    build = [=] { return weigh(matmul(a, b), w); };
    return std::vector<NodePtr>{a, b};
  }});
  cases.push_back({"matmul_mat_vec", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({3, 4}, rng);
    auto b = random_param({4}, rng);
    auto w = Tensor::uniform({3}, rng, -1.0, 1.0);
    build = [=] { return weigh(matmul(a, b), w); };
    return std::vector<NodePtr>{a, b};
  }});
  cases.push_back({"add", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({5}, rng);
    auto b = random_param({5}, rng);
    auto w = Tensor::uniform({5}, rng, -1.0, 1.0);
    build = [=] { return weigh(add(a, b), w); };
    return std::vector<NodePtr>{a, b};
  }});
  cases.push_back({"sub", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({5}, rng);
    auto b = random_param({5}, rng);
    auto w = Tensor::uniform({5}, rng, -1.0, 1.0);
    build = [=] { return weigh(sub(a, b), w); };
    return std::vector<NodePtr>{a, b};
  }});
  cases.push_back({"mul", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({5}, rng);
    auto b = random_param({5}, rng);
    auto w = Tensor::uniform({5}, rng, -1.0, 1.0);
    build = [=] { return weigh(mul(a, b), w); };
    return std::vector<NodePtr>{a, b};
  }});
  cases.push_back({"sigmoid", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({6}, rng, -3.0, 3.0);
    auto w = Tensor::uniform({6}, rng, -1.0, 1.0);
    build = [=] { return weigh(sigmoid(a), w); };
    return std::vector<NodePtr>{a};
  }});
  cases.push_back({"tanh", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({6}, rng, -3.0, 3.0);
    auto w = Tensor::uniform({6}, rng, -1.0, 1.0);
    build = [=] { return weigh(tanh_op(a), w); };
    return std::vector<NodePtr>{a};
  }});
  cases.push_back({"log", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({6}, rng, 0.2, 3.0);
    auto w = Tensor::uniform({6}, rng, -1.0, 1.0);
    build = [=] { return weigh(log_op(a), w); };
    return std::vector<NodePtr>{a};
  }});
  cases.push_back({"scale", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({6}, rng);
    const double c = rng.uniform(-2.0, 2.0);
    auto w = Tensor::uniform({6}, rng, -1.0, 1.0);
    build = [=] { return weigh(scale(a, c), w); };
    return std::vector<NodePtr>{a};
  }});
  cases.push_back({"concat", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({3}, rng);
    auto b = random_param({2}, rng);
    auto c = random_param({4}, rng);
    auto w = Tensor::uniform({9}, rng, -1.0, 1.0);
    build = [=] {
      std::vector<NodePtr> parts{a, b, c};
      return weigh(concat(parts), w);
    };
    return std::vector<NodePtr>{a, b, c};
  }});
  cases.push_back({"sum", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({2, 3}, rng);
    build = [=] { return sum(a); };
    return std::vector<NodePtr>{a};
  }});
  cases.push_back({"softmax", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({5}, rng, -2.0, 2.0);
    auto w = Tensor::uniform({5}, rng, -1.0, 1.0);
    build = [=] { return weigh(softmax(a), w); };
    return std::vector<NodePtr>{a};
  }});
  cases.push_back({"pick", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({5}, rng);
    const std::size_t i = rng.index(5);
    build = [=] { return pick(a, i); };
    return std::vector<NodePtr>{a};
  }});
  cases.push_back({"dot", [](Rng& rng, std::function<NodePtr()>& build) {
    auto a = random_param({5}, rng);
    auto b = random_param({5}, rng);
    build = [=] { return dot(a, b); };
    return std::vector<NodePtr>{a, b};
  }});
  cases.push_back({"embed_row", [](Rng& rng, std::function<NodePtr()>& build) {
    auto table = random_param({4, 3}, rng);
    const std::size_t r0 = rng.index(4);
    const std::size_t r1 = rng.index(4);
    auto w = Tensor::uniform({3}, rng, -1.0, 1.0);
    build = [=] {
      // Two lookups, possibly of the same row, to exercise accumulation.
      return add(weigh(embed_row(table, r0), w), sum(embed_row(table, r1)));
    };
    return std::vector<NodePtr>{table};
  }});
  cases.push_back({"clamp", [](Rng& rng, std::function<NodePtr()>& build) {
    // Values kept strictly inside the clamp interval: the kink at the
    // boundary is not differentiable, which is fine for training but not a
    // fair finite-difference target.
    auto a = random_param({6}, rng, 0.1, 0.9);
    auto w = Tensor::uniform({6}, rng, -1.0, 1.0);
    build = [=] { return weigh(clamp(a, 1e-12, 1.0 - 1e-12), w); };
    return std::vector<NodePtr>{a};
  }});
  cases.push_back({"gru_cell", [](Rng& rng, std::function<NodePtr()>& build) {
    const std::size_t d = 4, H = 5;
    auto gp = GruParams::init(d, H, rng);
    auto x = random_param({d}, rng);
    auto h = random_param({H}, rng);
    auto w = Tensor::uniform({H}, rng, -1.0, 1.0);
    build = [=] { return weigh(gru_cell(x, h, gp), w); };
    std::vector<NodePtr> ps{x, h, gp.Wz, gp.Wr, gp.Wh, gp.Uz, gp.Ur, gp.Uh, gp.bz, gp.br, gp.bh};
    return ps;
  }});
  cases.push_back({"encode_sequence", [](Rng& rng, std::function<NodePtr()>& build) {
    const std::size_t d = 3, H = 4, V = 6;
    auto gp = GruParams::init(d, H, rng);
    auto table = random_param({V, d}, rng, -0.5, 0.5);
    std::vector<int> tokens;
    for (int i = 0; i < 5; ++i) tokens.push_back(static_cast<int>(rng.index(V)));
    auto w = Tensor::uniform({H}, rng, -1.0, 1.0);
    build = [=] { return weigh(encode_sequence(tokens, table, gp), w); };
    std::vector<NodePtr> ps{table, gp.Wz, gp.Wr, gp.Wh, gp.Uz, gp.Ur, gp.Uh, gp.bz, gp.br, gp.bh};
    return ps;
  }});
  cases.push_back({"stance_head", [](Rng& rng, std::function<NodePtr()>& build) {
    const std::size_t H = 5;
    auto head = StanceHead::init(H, rng);
    auto ctx = random_param({H}, rng);
    auto hc = random_param({H}, rng);
    build = [=] { return stance_prob(ctx, hc, head); };
    return std::vector<NodePtr>{ctx, hc, head.Wo, head.Wc, head.bo};
  }});
  cases.push_back({"loss_bin", [](Rng& rng, std::function<NodePtr()>& build) {
    auto p = random_param({1}, rng, 0.05, 0.95);
    const int y = rng.uniform() < 0.5 ? 0 : 1;
    build = [=] { return loss_bin_node(p, y); };
    return std::vector<NodePtr>{p};
  }});
  cases.push_back({"diamond_graph", [](Rng& rng, std::function<NodePtr()>& build) {
    // x feeds two branches that rejoin; checks gradient accumulation.
    auto x = random_param({4}, rng, -1.0, 1.0);
    auto w = Tensor::uniform({4}, rng, -1.0, 1.0);
    build = [=] {
      NodePtr a = sigmoid(x);
      NodePtr b = tanh_op(x);
      return weigh(mul(a, b), w);
    };
    return std::vector<NodePtr>{x};
  }});
  cases.push_back({"composite_graph", [](Rng& rng, std::function<NodePtr()>& build) {
    auto W = random_param({4, 4}, rng, -0.8, 0.8);
    auto x = random_param({4}, rng, -1.0, 1.0);
    auto b = random_param({4}, rng, -0.5, 0.5);
    build = [=] {
      NodePtr h = tanh_op(add(matmul(x, W), b));
      NodePtr s = softmax(h);
      NodePtr p = clamp(pick(s, 1), 1e-12, 1.0 - 1e-12);
      return scale(log_op(p), -1.0);
    };
    return std::vector<NodePtr>{W, x, b};
  }});

  std::vector<GradCheckEntry> results;
  for (const auto& c : cases) {
    results.push_back({c.name, run_case(c, seed, instances_per_op)});
  }

  // End-to-end tree losses for both directions on random 4-node trees.
  for (Direction dir : {Direction::TD, Direction::BU}) {
    double worst = 0.0;
    const int tree_instances = 3;
    for (int t = 0; t < tree_instances; ++t) {
      auto fx = EndToEndFixture::make(dir, seed, t);
      auto params = fx.clf.params.nodes();
      worst = std::max(worst, finite_diff_max_rel_error([&fx] { return fx.loss(); }, params));
    }
    results.push_back({std::string("end_to_end_") + direction_name(dir), worst});
  }

  if (inject_fault) {
    OpCase faulty{"tanh_corrupted", [](Rng& rng, std::function<NodePtr()>& build) {
      auto a = random_param({6}, rng, -3.0, 3.0);
      auto w = Tensor::uniform({6}, rng, -1.0, 1.0);
      build = [=] { return weigh(corrupted_tanh(a), w); };
      return std::vector<NodePtr>{a};
    }};
    results.push_back({faulty.name, run_case(faulty, seed, instances_per_op)});
  }
  return results;
}

}  // namespace treemil
