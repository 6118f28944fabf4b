#include "jptdp/model.h"

#include "jptdp/errors.h"
#include "jptdp/utf8.h"

namespace jptdp {

namespace {

void require_positive(int v, const char* name) {
  if (v < 1) throw ConfigError(std::string(name) + " must be positive, got " + std::to_string(v));
}

int argmax(const Tensor& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v.data[i] > v.data[best]) best = i;
  return best;
}

}  // namespace

void Hyperparams::validate() const {
  require_positive(word_dim, "word_dim");
  require_positive(ctx_state_dim, "ctx_state_dim");
  require_positive(ctx_layers, "ctx_layers");
  require_positive(mlp_hidden, "mlp_hidden");
  require_positive(epochs, "epochs");
  if (use_chars) {
    require_positive(char_dim, "char_dim");
    require_positive(char_hidden_dim, "char_hidden_dim");
  }
  if (word_dropout_alpha < 0) throw ConfigError("word_dropout_alpha must be >= 0");
  if (noise_sigma < 0) throw ConfigError("noise_sigma must be >= 0");
  if (margin < 0) throw ConfigError("margin must be >= 0");
}

JointModel::CharChannel::CharChannel(const Hyperparams& hp, int num_chars,
                                     std::mt19937_64& rng)
    : emb("char_emb", Tensor::mat(num_chars, hp.char_dim)),
      bilstm("char_bilstm", hp.char_dim, hp.char_hidden_dim, 1, rng) {
  glorot_init(emb.value, rng);
}

JointModel::JointModel(Hyperparams hp_, Vocab vocab_, std::mt19937_64& rng)
    : hp(hp_),
      vocab(std::move(vocab_)),
      word_emb("word_emb", Tensor::mat(static_cast<int>(vocab.words.size()), hp_.word_dim)),
      chars(),
      ctx("ctx_bilstm", hp_.input_dim(), hp_.ctx_state_dim, hp_.ctx_layers, rng),
      tagger("tagger", hp_.feature_dim(), static_cast<int>(vocab.upos.size()), rng),
      arc("mlp_arc", 2 * hp_.feature_dim(), hp_.mlp_hidden, 1, rng),
      rel("mlp_rel", 2 * hp_.feature_dim(), hp_.mlp_hidden,
          static_cast<int>(vocab.rels.size()), rng) {
  hp.validate();
  if (vocab.upos.empty()) throw DataError("vocabulary has no POS tags");
  if (vocab.rels.empty()) throw DataError("vocabulary has no relation types");
  glorot_init(word_emb.value, rng);
  if (hp.use_chars)
    chars.emplace(hp, static_cast<int>(vocab.chars.size()), rng);
}

std::vector<ParamTensor*> JointModel::params() {
  std::vector<ParamTensor*> out{&word_emb};
  if (chars) {
    out.push_back(&chars->emb);
    for (ParamTensor* p : chars->bilstm.params()) out.push_back(p);
  }
  for (ParamTensor* p : ctx.params()) out.push_back(p);
  for (ParamTensor* p : tagger.params()) out.push_back(p);
  for (ParamTensor* p : arc.params()) out.push_back(p);
  for (ParamTensor* p : rel.params()) out.push_back(p);
  return out;
}

std::vector<NodeRef> JointModel::encode(Graph& g, const Sentence& s, bool training,
                                        std::mt19937_64& rng) {
  int n = s.size();
  if (n == 0) throw ContractError("encode: empty sentence");
  NodeRef wtab = g.param(word_emb);
  std::vector<NodeRef> inputs;
  inputs.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const std::string& form = i == 0 ? std::string(Vocab::kRootForm) : s.tokens[i - 1].form();
    int wid = i == 0 ? Vocab::kRootWord : vocab.word_id(form);
    wid = dropped_word_id(wid, vocab, hp.word_dropout_alpha, training, rng);
    NodeRef e = g.pick_row(wtab, wid);
    if (chars) {
      std::vector<NodeRef> cembs;
      for (const std::string& cp : utf8_codepoints(form))
        cembs.push_back(g.pick_row(g.param(chars->emb), vocab.char_id(cp)));
      e = g.concat(e, bilstm_final(g, chars->bilstm, cembs));
    }
    e = g.gaussian_noise(e, hp.noise_sigma, training, rng);
    inputs.push_back(e);
  }
  return bilstm_transduce(g, ctx, inputs);
}

NodeRef JointModel::tagging_loss(Graph& g, const std::vector<NodeRef>& v,
                                 const Sentence& s) {
  NodeRef total = g.constant(0);
  for (int m = 1; m <= s.size(); ++m) {
    NodeRef logits = linear_apply(g, tagger, v[m]);
    total = g.add(total, g.neg_log_softmax(logits, vocab.upos_id(s.tokens[m - 1].upos())));
  }
  return total;
}

ArcScores JointModel::score_all_arcs(Graph& g, const std::vector<NodeRef>& v) {
  int n = static_cast<int>(v.size()) - 1;
  int half = hp.feature_dim();
  NodeRef w1 = g.param(arc.w1);
  NodeRef b1 = g.param(arc.b1);
  NodeRef w2 = g.param(arc.w2);
  NodeRef b2 = g.param(arc.b2);

  // W1 concat(v_h, v_m) = W1[:, :half] v_h + W1[:, half:] v_m, so each
  // position contributes two cached matvecs instead of n full ones.
  std::vector<NodeRef> head_half(n + 1), mod_half(n + 1);
  for (int i = 0; i <= n; ++i) {
    head_half[i] = g.matvec_cols(w1, v[i], 0);
    mod_half[i] = g.matvec_cols(w1, v[i], half);
  }

  ArcScores out;
  out.values = Tensor::mat(n + 1, n + 1);
  out.nodes.assign(n + 1, std::vector<NodeRef>(n + 1, -1));
  for (int h = 0; h <= n; ++h)
    for (int m = 1; m <= n; ++m) {
      if (h == m) continue;
      NodeRef hidden = g.tanh(g.add(g.add(head_half[h], mod_half[m]), b1));
      NodeRef score = g.pick(g.add(g.matvec(w2, hidden), b2), 0);
      out.nodes[h][m] = score;
      out.values(h, m) = g.value(score)(0);
    }
  return out;
}

NodeRef JointModel::arc_loss(Graph& g, const ArcScores& scores,
                             const std::vector<int>& gold) {
  int n = scores.values.rows() - 1;
  if (static_cast<int>(gold.size()) != n + 1)
    throw ContractError("arc_loss: gold size " + std::to_string(gold.size()) +
                        " does not match " + std::to_string(n) + " tokens");
  Tensor augmented = scores.values;
  loss_augment(augmented, gold, hp.margin);
  std::vector<int> pred = eisner_decode(augmented, hp.single_root);

  if (hp.global_arc_loss) {
    int mismatches = 0;
    NodeRef diff = g.constant(0);
    for (int m = 1; m <= n; ++m) {
      if (pred[m] == gold[m]) continue;
      ++mismatches;
      diff = g.add(diff, g.sub(scores.nodes[pred[m]][m], scores.nodes[gold[m]][m]));
    }
    if (mismatches == 0) return g.constant(0);
    diff = g.add(diff, g.constant(hp.margin * mismatches));
    return g.max(diff, 0);
  }

  NodeRef total = g.constant(0);
  for (int m = 1; m <= n; ++m)
    if (pred[m] != gold[m])
      total = g.add(total, g.sub(scores.nodes[pred[m]][m], scores.nodes[gold[m]][m]));
  return total;
}

NodeRef JointModel::rel_loss(Graph& g, const std::vector<NodeRef>& v,
                             const Sentence& s) {
  int n = s.size();
  int num_rels = static_cast<int>(vocab.rels.size());
  NodeRef total = g.constant(0);
  for (const Token& t : s.tokens) {
    int h = t.head;
    if (h < 0 || h > n)
      throw DataError("token " + std::to_string(t.id) + ": head " + std::to_string(h) +
                      " invalid for relation loss");
    int gold_r = vocab.rel_id(t.deprel());
    if (num_rels < 2) continue;
    NodeRef u = mlp_apply(g, rel, g.concat(v[h], v[t.id]));
    const Tensor& uv = g.value(u);
    int best_wrong = -1;
    for (int r = 0; r < num_rels; ++r) {
      if (r == gold_r) continue;
      if (best_wrong < 0 || uv(r) > uv(best_wrong)) best_wrong = r;
    }
    NodeRef viol = g.add(g.sub(g.pick(u, best_wrong), g.pick(u, gold_r)),
                         g.constant(hp.margin));
    total = g.add(total, g.max(viol, 0));
  }
  return total;
}

NodeRef JointModel::joint_loss(Graph& g, const Sentence& s, bool training,
                               std::mt19937_64& rng) {
  std::vector<NodeRef> v = encode(g, s, training, rng);
  NodeRef l_pos = tagging_loss(g, v, s);
  NodeRef l_arc = arc_loss(g, score_all_arcs(g, v), gold_heads(s));
  NodeRef l_rel = rel_loss(g, v, s);
  return g.add(g.add(l_pos, l_arc), l_rel);
}

JointPrediction JointModel::predict(const Sentence& s) {
  Graph g;
  std::mt19937_64 unused(0);
  std::vector<NodeRef> v = encode(g, s, false, unused);
  int n = s.size();

  JointPrediction out;
  out.tags.reserve(n);
  for (int m = 1; m <= n; ++m)
    out.tags.push_back(argmax(g.value(linear_apply(g, tagger, v[m]))));

  ArcScores scores = score_all_arcs(g, v);
  out.heads = eisner_decode(scores.values, hp.single_root);

  out.rels.assign(n + 1, -1);
  for (int m = 1; m <= n; ++m) {
    NodeRef u = mlp_apply(g, rel, g.concat(v[out.heads[m]], v[m]));
    out.rels[m] = argmax(g.value(u));
  }
  return out;
}

std::vector<int> gold_heads(const Sentence& s) {
  int n = s.size();
  std::vector<int> heads(n + 1, -1);
  for (const Token& t : s.tokens) {
    if (t.head < 0)
      throw DataError("token " + std::to_string(t.id) + " has no gold head");
    if (t.head > n)
      throw DataError("token " + std::to_string(t.id) + ": head " +
                      std::to_string(t.head) + " out of range");
    heads[t.id] = t.head;
  }
  return heads;
}

void apply_prediction(const JointPrediction& pred, const Vocab& vocab, Sentence& s) {
  int n = s.size();
  if (static_cast<int>(pred.tags.size()) != n ||
      static_cast<int>(pred.heads.size()) != n + 1)
    throw ContractError("apply_prediction: size mismatch for " + std::to_string(n) +
                        " tokens");
  for (int m = 1; m <= n; ++m) {
    Token& t = s.tokens[m - 1];
    t.set_upos(vocab.upos.at(pred.tags[m - 1]));
    t.set_head(pred.heads[m]);
    t.set_deprel(vocab.rels.at(pred.rels[m]));
  }
}

}  // namespace jptdp
