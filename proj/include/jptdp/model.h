#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jptdp/conllu.h"
#include "jptdp/eisner.h"
#include "jptdp/graph.h"
#include "jptdp/layers.h"

namespace jptdp {

struct Hyperparams {
  int char_dim = 64;
  int char_hidden_dim = 64;  // per direction; char word vector = 2x this
  int word_dim = 128;
  int ctx_state_dim = 128;  // per direction
  int ctx_layers = 2;
  int mlp_hidden = 100;
  real word_dropout_alpha = 0.25;
  real noise_sigma = 0.2;
  real margin = 1.0;
  int epochs = 30;
  std::uint64_t seed = 42;
  bool use_chars = true;
  bool single_root = true;
  bool global_arc_loss = false;  // single hinge over tree scores instead of
                                 // the per-position sum

  int input_dim() const { return word_dim + (use_chars ? 2 * char_hidden_dim : 0); }
  int feature_dim() const { return 2 * ctx_state_dim; }
  void validate() const;  // throws ConfigError
};

// Arc scores plus the graph nodes they came from, so losses stay
// differentiable. values is (n+1)x(n+1); cells with h == m or m == 0 are 0
// and have no node.
struct ArcScores {
  Tensor values;
  std::vector<std::vector<NodeRef>> nodes;
};

struct JointPrediction {
  std::vector<int> tags;   // length n, tags[i] for token i+1
  std::vector<int> heads;  // length n+1, heads[0] = -1
  std::vector<int> rels;   // length n+1, rels[0] = -1
};

// Tagger and parser over one shared sentence encoding: embeddings feed a
// stacked context BiLSTM; its states v_i feed a linear tag head and MLP
// scorers for arcs and relations.
struct JointModel {
  struct CharChannel {
    ParamTensor emb;
    BiLstm bilstm;
    CharChannel(const Hyperparams& hp, int num_chars, std::mt19937_64& rng);
  };

  Hyperparams hp;
  Vocab vocab;
  ParamTensor word_emb;
  std::optional<CharChannel> chars;  // absent when use_chars is false
  BiLstm ctx;
  LinearParams tagger;
  MLPParams arc;  // scalar output on concat(v_h, v_m)
  MLPParams rel;

  JointModel(Hyperparams hp, Vocab vocab, std::mt19937_64& rng);

  std::vector<ParamTensor*> params();

  // v_0..v_n with v_0 the artificial root. Word dropout and Gaussian noise
  // fire only when training; inference draws nothing from rng.
  std::vector<NodeRef> encode(Graph& g, const Sentence& s, bool training,
                              std::mt19937_64& rng);

  // Sum of per-token cross entropies against gold UPOS, root excluded.
  NodeRef tagging_loss(Graph& g, const std::vector<NodeRef>& v, const Sentence& s);

  ArcScores score_all_arcs(Graph& g, const std::vector<NodeRef>& v);

  // Structured hinge with loss-augmented decoding. Per-position form: sum of
  // score(pred_head, m) - score(gold_head, m) over mismatched m; zero
  // constant when the augmented decode returns gold. Global form:
  // max(0, augmented tree score difference).
  NodeRef arc_loss(Graph& g, const ArcScores& scores, const std::vector<int>& gold);

  // Per gold arc: max(0, margin + best wrong relation logit - gold logit).
  NodeRef rel_loss(Graph& g, const std::vector<NodeRef>& v, const Sentence& s);

  // L_POS + L_arc + L_rel over one shared encode pass.
  NodeRef joint_loss(Graph& g, const Sentence& s, bool training, std::mt19937_64& rng);

  JointPrediction predict(const Sentence& s);
};

// Gold heads as a vector indexed by token id, [0] = -1. Throws DataError on
// a missing ("_") or out-of-range head.
std::vector<int> gold_heads(const Sentence& s);

// Writes predicted UPOS, HEAD, and DEPREL into the sentence columns.
void apply_prediction(const JointPrediction& pred, const Vocab& vocab, Sentence& s);

}  // namespace jptdp
