#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "jptdp/conllu.h"
#include "jptdp/graph.h"
#include "jptdp/optim.h"

namespace jptdp {

// Closed vocabularies gathered from training data. Word forms are matched
// ASCII-lowercased; characters are raw UTF-8 code points. Index 0 of words
// and chars is the unknown entry, word index 1 the artificial root.
struct Vocab {
  static constexpr int kUnkWord = 0;
  static constexpr int kRootWord = 1;
  static constexpr int kUnkChar = 0;
  static constexpr const char* kRootForm = "*root*";

  std::vector<std::string> words, chars, upos, rels;
  std::vector<std::int64_t> word_freq;
  std::unordered_map<std::string, int> word_ids, char_ids, upos_ids, rel_ids;

  int word_id(const std::string& form) const;  // lowercases; kUnkWord if absent
  int char_id(const std::string& codepoint) const;
  int upos_id(const std::string& tag) const;  // throws DataError if unknown
  int rel_id(const std::string& rel) const;   // throws DataError if unknown
  std::int64_t freq(int word) const;

  // Rebuilds the lookup maps from the dense string arrays (checkpoint load).
  void rebuild_maps();
};

Vocab build_vocab(const std::vector<Sentence>& train);

// Word dropout: a known word of training frequency f is replaced by the
// unknown id with probability alpha / (alpha + f). Identity outside
// training or for reserved ids; draws from rng only when a replacement is
// possible, keeping inference runs RNG-silent.
int dropped_word_id(int word, const Vocab& vocab, real alpha, bool training,
                    std::mt19937_64& rng);

// Single-direction LSTM cell, one ParamTensor per gate matrix and bias.
struct LSTMParams {
  ParamTensor wi, wf, wo, wg;  // input weights, hidden x input
  ParamTensor ui, uf, uo, ug;  // recurrent weights, hidden x hidden
  ParamTensor bi, bf, bo, bg;  // biases

  LSTMParams(const std::string& prefix, int input_dim, int hidden_dim,
             std::mt19937_64& rng);
  int hidden_dim() const { return bi.value.size(); }
  std::vector<ParamTensor*> params();
};

struct LSTMState {
  NodeRef h = -1;
  NodeRef c = -1;
};

LSTMState lstm_initial_state(Graph& g, int hidden_dim);
// i = sig(Wi x + Ui h + bi), f, o likewise, g~ = tanh(Wg x + Ug h + bg),
// c = f*c_prev + i*g~, h = o*tanh(c).
LSTMState lstm_step(Graph& g, LSTMParams& p, NodeRef x, const LSTMState& prev);

// Stacked bidirectional LSTM. Layer 0 consumes input_dim, deeper layers
// consume the 2*hidden concatenation produced below them.
struct BiLstm {
  struct Layer {
    LSTMParams fwd, bwd;
    Layer(const std::string& prefix, int input_dim, int hidden_dim,
          std::mt19937_64& rng);
  };
  std::vector<Layer> layers;

  BiLstm(const std::string& prefix, int input_dim, int hidden_dim, int num_layers,
         std::mt19937_64& rng);
  std::vector<ParamTensor*> params();
};

// Per-position outputs concat(h_fwd[i], h_bwd[i]) of the top layer.
std::vector<NodeRef> bilstm_transduce(Graph& g, BiLstm& net,
                                      const std::vector<NodeRef>& inputs);
// concat(final forward state, final backward state) of the top layer; the
// fixed-size sequence encoding used for character-level word vectors.
NodeRef bilstm_final(Graph& g, BiLstm& net, const std::vector<NodeRef>& inputs);

// Plain affine map out = W x + b.
struct LinearParams {
  ParamTensor w, b;

  LinearParams(const std::string& prefix, int input_dim, int output_dim,
               std::mt19937_64& rng);
  std::vector<ParamTensor*> params();
};

NodeRef linear_apply(Graph& g, LinearParams& p, NodeRef x);

// One-hidden-layer perceptron out = W2 tanh(W1 x + b1) + b2.
struct MLPParams {
  ParamTensor w1, b1, w2, b2;

  MLPParams(const std::string& prefix, int input_dim, int hidden_dim, int output_dim,
            std::mt19937_64& rng);
  std::vector<ParamTensor*> params();
};

NodeRef mlp_apply(Graph& g, MLPParams& p, NodeRef x);

}  // namespace jptdp
