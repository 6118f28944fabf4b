#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "jptdp/errors.h"
#include "jptdp/model.h"
#include "jptdp/optim.h"
#include "testutil.h"

using jptdp::ArcScores;
using jptdp::Graph;
using jptdp::Hyperparams;
using jptdp::JointModel;
using jptdp::NodeRef;
using jptdp::ParamTensor;
using jptdp::real;
using jptdp::Sentence;
using jptdp::Tensor;
using testutil::make_sentence;

namespace {

Hyperparams tiny_hp() {
  Hyperparams hp;
  hp.char_dim = 3;
  hp.char_hidden_dim = 3;
  hp.word_dim = 4;
  hp.ctx_state_dim = 5;
  hp.ctx_layers = 2;
  hp.mlp_hidden = 6;
  return hp;
}

std::vector<Sentence> corpus() {
  return {make_sentence({{"the", "DET", 2, "det"},
                         {"dog", "NOUN", 3, "nsubj"},
                         {"barks", "VERB", 0, "root"}}),
          make_sentence({{"dogs", "NOUN", 2, "nsubj"}, {"bark", "VERB", 0, "root"}})};
}

JointModel make_model(Hyperparams hp, std::uint64_t seed = 21) {
  std::mt19937_64 rng(seed);
  return JointModel(hp, jptdp::build_vocab(corpus()), rng);
}

void zero_all(std::vector<ParamTensor*> params) {
  for (ParamTensor* p : params) p->value.fill(0);
}

// Scalar input nodes standing in for arc scorer outputs; lets loss tests pin
// exact score values.
ArcScores manual_scores(Graph& g, const Tensor& values) {
  ArcScores sc;
  sc.values = values;
  int n1 = values.rows();
  sc.nodes.assign(n1, std::vector<NodeRef>(n1, -1));
  for (int h = 0; h < n1; ++h)
    for (int m = 1; m < n1; ++m)
      if (h != m) sc.nodes[h][m] = g.input(Tensor::vec(1, values(h, m)));
  return sc;
}

}  // namespace

TEST_CASE("encode shape and inference determinism") {
  JointModel model = make_model(tiny_hp());
  Sentence s = corpus()[0];
  std::mt19937_64 rng(3);
  std::mt19937_64 before = rng;
  Graph g1;
  auto v1 = model.encode(g1, s, false, rng);
  CHECK(rng == before);  // inference consumes no randomness
  REQUIRE(v1.size() == 4);
  for (NodeRef v : v1) CHECK(g1.value(v).size() == 10);  // 2 x ctx_state_dim

  Graph g2;
  auto v2 = model.encode(g2, s, false, rng);
  for (std::size_t i = 0; i < v1.size(); ++i)
    CHECK(g1.value(v1[i]).data == g2.value(v2[i]).data);
}

TEST_CASE("training mode consumes randomness and perturbs inputs") {
  Hyperparams hp = tiny_hp();
  JointModel model = make_model(hp);
  Sentence s = corpus()[0];
  std::mt19937_64 rng(3);
  std::mt19937_64 before = rng;
  Graph g;
  model.encode(g, s, true, rng);
  CHECK(!(rng == before));
}

TEST_CASE("ablation purity: no character parameters without the channel") {
  Hyperparams hp = tiny_hp();
  hp.use_chars = false;
  JointModel model = make_model(hp);
  CHECK(hp.input_dim() == hp.word_dim);
  for (ParamTensor* p : model.params())
    CHECK(p->name.find("char") == std::string::npos);
  // context layer 0 consumes word embeddings directly
  CHECK(model.ctx.layers[0].fwd.wi.value.cols() == hp.word_dim);

  JointModel with_chars = make_model(tiny_hp());
  CHECK(with_chars.params().size() > model.params().size());
  Sentence s = corpus()[1];
  std::mt19937_64 rng(4);
  Graph g;
  CHECK(model.encode(g, s, false, rng).size() == 3);
}

TEST_CASE("uniform tag logits cost n times log tag count") {
  // seventeen distinct tags in one chain sentence
  std::vector<testutil::Row> rows;
  for (int i = 0; i < 17; ++i)
    rows.push_back({"w" + std::to_string(i), "T" + std::to_string(i), i, "dep"});
  Sentence s = make_sentence(rows);
  std::mt19937_64 rng(5);
  JointModel model(tiny_hp(), jptdp::build_vocab({s}), rng);
  zero_all(model.tagger.params());
  Graph g;
  std::mt19937_64 r2(6);
  auto v = model.encode(g, s, false, r2);
  real loss = g.value(model.tagging_loss(g, v, s))(0);
  CHECK(loss == doctest::Approx(17 * std::log(17.0)).epsilon(1e-9));
}

TEST_CASE("dominant gold logit drives the tagging loss to zero") {
  JointModel model = make_model(tiny_hp());
  Sentence s = make_sentence({{"dog", "NOUN", 0, "root"}, {"dogs", "NOUN", 1, "dep"}});
  zero_all(model.tagger.params());
  model.tagger.b.value(model.vocab.upos_id("NOUN")) = 50;
  Graph g;
  std::mt19937_64 rng(7);
  auto v = model.encode(g, s, false, rng);
  CHECK(g.value(model.tagging_loss(g, v, s))(0) == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("tagging loss matches independent softmax arithmetic") {
  JointModel model = make_model(tiny_hp());
  Sentence s = corpus()[0];
  Graph g;
  std::mt19937_64 rng(8);
  auto v = model.encode(g, s, false, rng);
  real loss = g.value(model.tagging_loss(g, v, s))(0);

  real expect = 0;
  for (int m = 1; m <= s.size(); ++m) {
    const Tensor& feat = g.value(v[m]);
    std::vector<real> logits(model.vocab.upos.size());
    for (std::size_t t = 0; t < logits.size(); ++t) {
      logits[t] = model.tagger.b.value(static_cast<int>(t));
      for (int j = 0; j < feat.size(); ++j)
        logits[t] += model.tagger.w.value(static_cast<int>(t), j) * feat(j);
    }
    real mx = *std::max_element(logits.begin(), logits.end());
    real z = 0;
    for (real l : logits) z += std::exp(l - mx);
    int gold = model.vocab.upos_id(s.tokens[m - 1].upos());
    expect -= logits[gold] - mx - std::log(z);
  }
  CHECK(loss == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("arc scores: shape, zero-network constant, asymmetry") {
  JointModel model = make_model(tiny_hp());
  Sentence s = corpus()[0];
  Graph g;
  std::mt19937_64 rng(9);
  auto v = model.encode(g, s, false, rng);
  ArcScores sc = model.score_all_arcs(g, v);
  CHECK(sc.values.rows() == 4);
  CHECK(sc.values.cols() == 4);
  bool asymmetric = false;
  for (int h = 1; h <= 3; ++h)
    for (int m = 1; m <= 3; ++m)
      if (h != m) {
        CHECK(std::isfinite(sc.values(h, m)));
        asymmetric |= std::abs(sc.values(h, m) - sc.values(m, h)) > 1e-6;
      }
  CHECK(asymmetric);

  zero_all(model.arc.params());
  model.arc.b2.value(0) = 0.75;
  Graph g2;
  auto v2 = model.encode(g2, s, false, rng);
  ArcScores flat = model.score_all_arcs(g2, v2);
  for (int h = 0; h <= 3; ++h)
    for (int m = 1; m <= 3; ++m)
      if (h != m) CHECK(flat.values(h, m) == 0.75);
}

TEST_CASE("cached column-split scorer equals the direct concat MLP") {
  JointModel model = make_model(tiny_hp());
  Sentence s = corpus()[0];
  Graph g;
  std::mt19937_64 rng(10);
  auto v = model.encode(g, s, false, rng);
  ArcScores sc = model.score_all_arcs(g, v);
  for (int h = 0; h <= 3; ++h)
    for (int m = 1; m <= 3; ++m) {
      if (h == m) continue;
      NodeRef direct = jptdp::mlp_apply(g, model.arc, g.concat(v[h], v[m]));
      CHECK(sc.values(h, m) == doctest::Approx(g.value(direct)(0)).epsilon(1e-12));
    }
}

TEST_CASE("arc loss is the zero constant when gold wins the augmented decode") {
  JointModel model = make_model(tiny_hp());
  Tensor s = Tensor::mat(3, 3);
  s(0, 1) = 5;
  s(1, 2) = 5;
  Graph g;
  ArcScores sc = manual_scores(g, s);
  NodeRef loss = model.arc_loss(g, sc, {-1, 0, 1});
  CHECK(g.value(loss)(0) == 0);
  g.backward(loss);  // constant: must not touch any parameter
  for (ParamTensor* p : model.params())
    for (real v : p->grad.data) CHECK(v == 0);
}

TEST_CASE("single mismatched head contributes its score difference") {
  JointModel model = make_model(tiny_hp());
  Tensor s = Tensor::mat(4, 4);
  for (int h = 0; h <= 3; ++h)
    for (int m = 1; m <= 3; ++m)
      if (h != m) s(h, m) = -10;
  s(0, 1) = 10;
  s(1, 2) = 10;
  s(2, 3) = 1;
  s(1, 3) = 1.4;  // wins once augmented: 2.4 > 1
  Graph g;
  NodeRef loss = model.arc_loss(g, manual_scores(g, s), {-1, 0, 1, 2});
  CHECK(g.value(loss)(0) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("per-position arc loss can dip below zero but never past the margin bound") {
  JointModel model = make_model(tiny_hp());
  Tensor s = Tensor::mat(3, 3);
  s(0, 1) = 2;
  s(1, 2) = 2;
  s(2, 1) = 1.8;
  s(0, 2) = 1.8;
  Graph g;
  NodeRef loss = model.arc_loss(g, manual_scores(g, s), {-1, 0, 1});
  CHECK(g.value(loss)(0) == doctest::Approx(-0.4).epsilon(1e-12));

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + trial % 4;
    Tensor scores = Tensor::mat(n + 1, n + 1);
    testutil::randomize(scores, rng, -3, 3);
    for (int m = 1; m <= n; ++m) scores(m, m) = 0;
    auto trees = testutil::all_projective_trees(n, true);
    const auto& gold = trees[rng() % trees.size()];
    Graph pg;
    real value = pg.value(model.arc_loss(pg, manual_scores(pg, scores), gold))(0);
    int mismatches = 0;
    auto pred = jptdp::eisner_decode([&] {
      Tensor aug = scores;
      jptdp::loss_augment(aug, gold, model.hp.margin);
      return aug;
    }(), true);
    for (int m = 1; m <= n; ++m) mismatches += pred[m] != gold[m];
    CHECK(value >= -model.hp.margin * mismatches - 1e-9);
  }
}

TEST_CASE("global arc loss applies a single floored hinge") {
  Hyperparams hp = tiny_hp();
  hp.global_arc_loss = true;
  JointModel model = make_model(hp);
  Tensor s = Tensor::mat(3, 3);
  s(0, 1) = 2;
  s(1, 2) = 2;
  s(2, 1) = 1.8;
  s(0, 2) = 1.8;
  Graph g;
  NodeRef loss = model.arc_loss(g, manual_scores(g, s), {-1, 0, 1});
  // two mismatches: max(0, (3.6 - 4) + 2 * margin)
  CHECK(g.value(loss)(0) == doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("relation loss: ties cost the margin, dominance costs nothing") {
  JointModel model = make_model(tiny_hp());
  Sentence s = corpus()[0];
  zero_all(model.rel.params());
  Graph g;
  std::mt19937_64 rng(12);
  auto v = model.encode(g, s, false, rng);
  CHECK(g.value(model.rel_loss(g, v, s))(0) == doctest::Approx(3.0).epsilon(1e-12));

  Sentence one = make_sentence({{"barks", "VERB", 0, "root"}});
  JointModel m2 = make_model(tiny_hp());
  zero_all(m2.rel.params());
  m2.rel.b2.value(m2.vocab.rel_id("root")) = 10;
  Graph g2;
  auto v2 = m2.encode(g2, one, false, rng);
  CHECK(g2.value(m2.rel_loss(g2, v2, one))(0) == 0);
}

TEST_CASE("relation loss matches independent arithmetic") {
  JointModel model = make_model(tiny_hp());
  Sentence s = corpus()[0];
  Graph g;
  std::mt19937_64 rng(13);
  auto v = model.encode(g, s, false, rng);
  real loss = g.value(model.rel_loss(g, v, s))(0);

  real expect = 0;
  int rels = static_cast<int>(model.vocab.rels.size());
  for (const jptdp::Token& t : s.tokens) {
    const Tensor& vh = g.value(v[t.head]);
    const Tensor& vm = g.value(v[t.id]);
    std::vector<real> in(vh.data.begin(), vh.data.end());
    in.insert(in.end(), vm.data.begin(), vm.data.end());
    std::vector<real> hidden(model.hp.mlp_hidden);
    for (int i = 0; i < model.hp.mlp_hidden; ++i) {
      real acc = model.rel.b1.value(i);
      for (std::size_t j = 0; j < in.size(); ++j)
        acc += model.rel.w1.value(i, static_cast<int>(j)) * in[j];
      hidden[i] = std::tanh(acc);
    }
    std::vector<real> u(rels);
    for (int r = 0; r < rels; ++r) {
      u[r] = model.rel.b2.value(r);
      for (int i = 0; i < model.hp.mlp_hidden; ++i)
        u[r] += model.rel.w2.value(r, i) * hidden[i];
    }
    int gold = model.vocab.rel_id(t.deprel());
    real best_wrong = -1e30;
    for (int r = 0; r < rels; ++r)
      if (r != gold) best_wrong = std::max(best_wrong, u[r]);
    expect += std::max(real(0), model.hp.margin + best_wrong - u[gold]);
  }
  CHECK(loss == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("joint loss is the sum of its parts over one shared encoding") {
  JointModel model = make_model(tiny_hp());
  Sentence s = corpus()[0];
  std::mt19937_64 rng(14);
  Graph g;
  real joint = g.value(model.joint_loss(g, s, false, rng))(0);

  Graph g2;
  auto v = model.encode(g2, s, false, rng);
  real pos = g2.value(model.tagging_loss(g2, v, s))(0);
  real arc = g2.value(model.arc_loss(g2, model.score_all_arcs(g2, v), gold_heads(s)))(0);
  real rel = g2.value(model.rel_loss(g2, v, s))(0);
  CHECK(joint == doctest::Approx(pos + arc + rel).epsilon(1e-12));
  CHECK(joint >= pos - model.hp.margin * s.size() - 1e-9);
}

TEST_CASE("joint gradients flow into every parameter tensor somewhere") {
  JointModel model = make_model(tiny_hp());
  Sentence s = corpus()[0];
  std::mt19937_64 rng(15);
  Graph g;
  NodeRef loss = model.joint_loss(g, s, true, rng);
  g.backward(loss);
  for (ParamTensor* p : model.params()) {
    real norm = 0;
    for (real v : p->grad.data) norm += v * v;
    INFO(p->name);
    CHECK(norm >= 0);  // finite
    CHECK(std::isfinite(norm));
  }
}

TEST_CASE("end-to-end gradients match finite differences") {
  JointModel model = make_model(tiny_hp(), 23);
  Sentence s = corpus()[0];
  std::mt19937_64 rng(16);
  auto forward = [&] {
    Graph g;
    return g.value(model.joint_loss(g, s, false, rng))(0);
  };
  Graph g;
  g.backward(model.joint_loss(g, s, false, rng));
  CHECK(testutil::max_gradient_error(model.params(), forward) < 1e-3);
}

TEST_CASE("parser gradients steer the shared encoder") {
  Sentence s = corpus()[0];
  JointModel joint_model = make_model(tiny_hp(), 31);
  JointModel tag_model = make_model(tiny_hp(), 31);

  std::mt19937_64 rng_a(32), rng_b(32);
  for (int step = 0; step < 5; ++step) {
    Graph ga;
    ga.backward(joint_model.joint_loss(ga, s, true, rng_a));
    jptdp::adam_update(joint_model.params());

    Graph gb;
    auto v = tag_model.encode(gb, s, true, rng_b);
    gb.backward(tag_model.tagging_loss(gb, v, s));
    jptdp::adam_update(tag_model.params());
  }
  const Tensor& a = joint_model.ctx.layers[0].fwd.wi.value;
  const Tensor& b = tag_model.ctx.layers[0].fwd.wi.value;
  real diff = 0;
  for (int i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a.data[i] - b.data[i]));
  CHECK(diff > 1e-9);
}

TEST_CASE("predict is deterministic and structurally valid") {
  JointModel model = make_model(tiny_hp());
  Sentence s = make_sentence({{"the", "_", -1, "_"},
                              {"dog", "_", -1, "_"},
                              {"barks", "_", -1, "_"}});
  for (jptdp::Token& t : s.tokens) t.cols[6] = "_";  // no gold heads at all
  auto p1 = model.predict(s);
  auto p2 = model.predict(s);
  CHECK(p1.heads == p2.heads);
  CHECK(p1.tags == p2.tags);
  CHECK(p1.rels == p2.rels);
  CHECK(p1.tags.size() == 3);
  CHECK(testutil::is_tree(p1.heads));
  CHECK(jptdp::is_projective(p1.heads));
  int roots = 0;
  for (int m = 1; m <= 3; ++m) roots += p1.heads[m] == 0;
  CHECK(roots == 1);
}

TEST_CASE("capacity: one sentence fits in 300 updates") {
  Hyperparams hp = tiny_hp();
  hp.word_dim = 32;
  hp.ctx_state_dim = 32;
  hp.mlp_hidden = 16;
  hp.word_dropout_alpha = 0;
  hp.noise_sigma = 0;
  Sentence s = corpus()[0];
  std::mt19937_64 rng(17);
  JointModel model(hp, jptdp::build_vocab({s}), rng);
  for (int step = 0; step < 300; ++step) {
    Graph g;
    g.backward(model.joint_loss(g, s, true, rng));
    jptdp::adam_update(model.params());
  }
  Graph g;
  std::mt19937_64 r2(18);
  CHECK(g.value(model.joint_loss(g, s, false, r2))(0) < 0.01);
}

TEST_CASE("gold head extraction and prediction writing") {
  Sentence s = corpus()[0];
  CHECK(gold_heads(s) == std::vector<int>{-1, 2, 3, 0});
  Sentence missing = make_sentence({{"x", "X", 0, "root"}});
  missing.tokens[0].head = -1;
  CHECK_THROWS_AS(gold_heads(missing), jptdp::DataError);

  JointModel model = make_model(tiny_hp());
  auto pred = model.predict(s);
  Sentence out = s;
  apply_prediction(pred, model.vocab, out);
  for (int m = 1; m <= 3; ++m) {
    CHECK(out.tokens[m - 1].head == pred.heads[m]);
    CHECK(out.tokens[m - 1].cols[6] == std::to_string(pred.heads[m]));
    CHECK(out.tokens[m - 1].upos() == model.vocab.upos.at(pred.tags[m - 1]));
    CHECK(out.tokens[m - 1].deprel() == model.vocab.rels.at(pred.rels[m]));
  }
}
