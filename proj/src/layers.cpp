#include "jptdp/layers.h"

#include "jptdp/errors.h"
#include "jptdp/utf8.h"

namespace jptdp {

namespace {

int lookup_or(const std::unordered_map<std::string, int>& map, const std::string& key,
              int fallback) {
  auto it = map.find(key);
  return it == map.end() ? fallback : it->second;
}

int lookup_or_throw(const std::unordered_map<std::string, int>& map,
                    const std::string& key, const char* what) {
  auto it = map.find(key);
  if (it == map.end()) throw DataError(std::string(what) + " '" + key + "' not in vocabulary");
  return it->second;
}

}  // namespace

int Vocab::word_id(const std::string& form) const {
  return lookup_or(word_ids, lowercased(form), kUnkWord);
}

int Vocab::char_id(const std::string& codepoint) const {
  return lookup_or(char_ids, codepoint, kUnkChar);
}

int Vocab::upos_id(const std::string& tag) const {
  return lookup_or_throw(upos_ids, tag, "POS tag");
}

int Vocab::rel_id(const std::string& rel) const {
  return lookup_or_throw(rel_ids, rel, "relation");
}

std::int64_t Vocab::freq(int word) const {
  if (word < 0 || word >= static_cast<int>(word_freq.size()))
    throw ContractError("freq: word id " + std::to_string(word) + " out of range");
  return word_freq[word];
}

void Vocab::rebuild_maps() {
  word_ids.clear();
  char_ids.clear();
  upos_ids.clear();
  rel_ids.clear();
  for (int i = 2; i < static_cast<int>(words.size()); ++i) word_ids.emplace(words[i], i);
  for (int i = 1; i < static_cast<int>(chars.size()); ++i) char_ids.emplace(chars[i], i);
  for (int i = 0; i < static_cast<int>(upos.size()); ++i) upos_ids.emplace(upos[i], i);
  for (int i = 0; i < static_cast<int>(rels.size()); ++i) rel_ids.emplace(rels[i], i);
}

Vocab build_vocab(const std::vector<Sentence>& train) {
  Vocab v;
  v.words = {"<unk>", Vocab::kRootForm};
  v.word_freq = {0, 0};
  v.chars = {"<unk>"};

  auto add_chars = [&](const std::string& form) {
    for (const std::string& cp : utf8_codepoints(form))
      if (v.char_ids.emplace(cp, static_cast<int>(v.chars.size())).second)
        v.chars.push_back(cp);
  };
  add_chars(Vocab::kRootForm);

  for (const Sentence& s : train) {
    for (const Token& t : s.tokens) {
      std::string form = lowercased(t.form());
      auto [it, fresh] = v.word_ids.emplace(form, static_cast<int>(v.words.size()));
      if (fresh) {
        v.words.push_back(form);
        v.word_freq.push_back(0);
      }
      v.word_freq[it->second] += 1;
      add_chars(t.form());
      if (v.upos_ids.emplace(t.upos(), static_cast<int>(v.upos.size())).second)
        v.upos.push_back(t.upos());
      if (v.rel_ids.emplace(t.deprel(), static_cast<int>(v.rels.size())).second)
        v.rels.push_back(t.deprel());
    }
  }
  return v;
}

int dropped_word_id(int word, const Vocab& vocab, real alpha, bool training,
                    std::mt19937_64& rng) {
  if (!training || alpha <= 0 || word < 2) return word;
  real f = static_cast<real>(vocab.freq(word));
  real p = alpha / (alpha + f);
  std::uniform_real_distribution<real> dist(0, 1);
  return dist(rng) < p ? Vocab::kUnkWord : word;
}

LSTMParams::LSTMParams(const std::string& prefix, int input_dim, int hidden_dim,
                       std::mt19937_64& rng)
    : wi(prefix + ".wi", Tensor::mat(hidden_dim, input_dim)),
      wf(prefix + ".wf", Tensor::mat(hidden_dim, input_dim)),
      wo(prefix + ".wo", Tensor::mat(hidden_dim, input_dim)),
      wg(prefix + ".wg", Tensor::mat(hidden_dim, input_dim)),
      ui(prefix + ".ui", Tensor::mat(hidden_dim, hidden_dim)),
      uf(prefix + ".uf", Tensor::mat(hidden_dim, hidden_dim)),
      uo(prefix + ".uo", Tensor::mat(hidden_dim, hidden_dim)),
      ug(prefix + ".ug", Tensor::mat(hidden_dim, hidden_dim)),
      bi(prefix + ".bi", Tensor::vec(hidden_dim)),
      bf(prefix + ".bf", Tensor::vec(hidden_dim)),
      bo(prefix + ".bo", Tensor::vec(hidden_dim)),
      bg(prefix + ".bg", Tensor::vec(hidden_dim)) {
  for (ParamTensor* p : {&wi, &wf, &wo, &wg, &ui, &uf, &uo, &ug})
    glorot_init(p->value, rng);
}

std::vector<ParamTensor*> LSTMParams::params() {
  return {&wi, &wf, &wo, &wg, &ui, &uf, &uo, &ug, &bi, &bf, &bo, &bg};
}

LSTMState lstm_initial_state(Graph& g, int hidden_dim) {
  LSTMState s;
  s.h = g.input(Tensor::vec(hidden_dim));
  s.c = g.input(Tensor::vec(hidden_dim));
  return s;
}

LSTMState lstm_step(Graph& g, LSTMParams& p, NodeRef x, const LSTMState& prev) {
  auto gate = [&](ParamTensor& w, ParamTensor& u, ParamTensor& b) {
    return g.add(g.add(g.matvec(g.param(w), x), g.matvec(g.param(u), prev.h)),
                 g.param(b));
  };
  NodeRef i = g.logistic(gate(p.wi, p.ui, p.bi));
  NodeRef f = g.logistic(gate(p.wf, p.uf, p.bf));
  NodeRef o = g.logistic(gate(p.wo, p.uo, p.bo));
  NodeRef gg = g.tanh(gate(p.wg, p.ug, p.bg));
  LSTMState next;
  next.c = g.add(g.mul(f, prev.c), g.mul(i, gg));
  next.h = g.mul(o, g.tanh(next.c));
  return next;
}

BiLstm::Layer::Layer(const std::string& prefix, int input_dim, int hidden_dim,
                     std::mt19937_64& rng)
    : fwd(prefix + ".fwd", input_dim, hidden_dim, rng),
      bwd(prefix + ".bwd", input_dim, hidden_dim, rng) {}

BiLstm::BiLstm(const std::string& prefix, int input_dim, int hidden_dim,
               int num_layers, std::mt19937_64& rng) {
  if (num_layers < 1)
    throw ConfigError("BiLstm: need at least one layer, got " + std::to_string(num_layers));
  layers.reserve(num_layers);
  for (int l = 0; l < num_layers; ++l) {
    int in = l == 0 ? input_dim : 2 * hidden_dim;
    layers.emplace_back(prefix + ".l" + std::to_string(l), in, hidden_dim, rng);
  }
}

std::vector<ParamTensor*> BiLstm::params() {
  std::vector<ParamTensor*> out;
  for (Layer& l : layers) {
    for (ParamTensor* p : l.fwd.params()) out.push_back(p);
    for (ParamTensor* p : l.bwd.params()) out.push_back(p);
  }
  return out;
}

namespace {

// Runs one bidirectional layer; returns per-position concat outputs and the
// two end states through the out parameters.
std::vector<NodeRef> run_layer(Graph& g, BiLstm::Layer& layer,
                               const std::vector<NodeRef>& inputs, NodeRef* fwd_last,
                               NodeRef* bwd_last) {
  int n = static_cast<int>(inputs.size());
  int hidden = layer.fwd.hidden_dim();
  std::vector<NodeRef> fwd_h(n), bwd_h(n);
  LSTMState state = lstm_initial_state(g, hidden);
  for (int i = 0; i < n; ++i) {
    state = lstm_step(g, layer.fwd, inputs[i], state);
    fwd_h[i] = state.h;
  }
  *fwd_last = state.h;
  state = lstm_initial_state(g, hidden);
  for (int i = n - 1; i >= 0; --i) {
    state = lstm_step(g, layer.bwd, inputs[i], state);
    bwd_h[i] = state.h;
  }
  *bwd_last = state.h;
  std::vector<NodeRef> out(n);
  for (int i = 0; i < n; ++i) out[i] = g.concat(fwd_h[i], bwd_h[i]);
  return out;
}

}  // namespace

std::vector<NodeRef> bilstm_transduce(Graph& g, BiLstm& net,
                                      const std::vector<NodeRef>& inputs) {
  if (inputs.empty()) throw ContractError("bilstm_transduce: empty input sequence");
  std::vector<NodeRef> seq = inputs;
  NodeRef fwd_last, bwd_last;
  for (BiLstm::Layer& layer : net.layers) seq = run_layer(g, layer, seq, &fwd_last, &bwd_last);
  return seq;
}

NodeRef bilstm_final(Graph& g, BiLstm& net, const std::vector<NodeRef>& inputs) {
  if (inputs.empty()) throw ContractError("bilstm_final: empty input sequence");
  std::vector<NodeRef> seq = inputs;
  NodeRef fwd_last = -1, bwd_last = -1;
  for (BiLstm::Layer& layer : net.layers) seq = run_layer(g, layer, seq, &fwd_last, &bwd_last);
  return g.concat(fwd_last, bwd_last);
}

LinearParams::LinearParams(const std::string& prefix, int input_dim, int output_dim,
                           std::mt19937_64& rng)
    : w(prefix + ".w", Tensor::mat(output_dim, input_dim)),
      b(prefix + ".b", Tensor::vec(output_dim)) {
  glorot_init(w.value, rng);
}

std::vector<ParamTensor*> LinearParams::params() { return {&w, &b}; }

NodeRef linear_apply(Graph& g, LinearParams& p, NodeRef x) {
  return g.add(g.matvec(g.param(p.w), x), g.param(p.b));
}

MLPParams::MLPParams(const std::string& prefix, int input_dim, int hidden_dim,
                     int output_dim, std::mt19937_64& rng)
    : w1(prefix + ".w1", Tensor::mat(hidden_dim, input_dim)),
      b1(prefix + ".b1", Tensor::vec(hidden_dim)),
      w2(prefix + ".w2", Tensor::mat(output_dim, hidden_dim)),
      b2(prefix + ".b2", Tensor::vec(output_dim)) {
  glorot_init(w1.value, rng);
  glorot_init(w2.value, rng);
}

std::vector<ParamTensor*> MLPParams::params() { return {&w1, &b1, &w2, &b2}; }

NodeRef mlp_apply(Graph& g, MLPParams& p, NodeRef x) {
  NodeRef hidden = g.tanh(g.add(g.matvec(g.param(p.w1), x), g.param(p.b1)));
  return g.add(g.matvec(g.param(p.w2), hidden), g.param(p.b2));
}

}  // namespace jptdp
