#include "jptdp/trainer.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "jptdp/errors.h"
#include "jptdp/optim.h"

namespace jptdp {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; this host is not");

namespace {

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

struct ByteWriter {
  std::string buf;

  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    buf.append(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void put_string(const std::string& s) {
    put<std::uint64_t>(s.size());
    buf.append(s);
  }
  void put_strings(const std::vector<std::string>& v) {
    put<std::uint64_t>(v.size());
    for (const std::string& s : v) put_string(s);
  }
};

struct ByteReader {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw IntegrityError("checkpoint truncated");
  }
  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof v);
    pos += sizeof v;
    return v;
  }
  std::string get_string() {
    auto n = get<std::uint64_t>();
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
  std::vector<std::string> get_strings() {
    auto n = get<std::uint64_t>();
    std::vector<std::string> v;
    v.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) v.push_back(get_string());
    return v;
  }
};

void write_hyper(ByteWriter& w, const Hyperparams& hp) {
  w.put<std::int32_t>(hp.char_dim);
  w.put<std::int32_t>(hp.char_hidden_dim);
  w.put<std::int32_t>(hp.word_dim);
  w.put<std::int32_t>(hp.ctx_state_dim);
  w.put<std::int32_t>(hp.ctx_layers);
  w.put<std::int32_t>(hp.mlp_hidden);
  w.put<std::int32_t>(hp.epochs);
  w.put<double>(hp.word_dropout_alpha);
  w.put<double>(hp.noise_sigma);
  w.put<double>(hp.margin);
  w.put<std::uint64_t>(hp.seed);
  w.put<std::uint8_t>(hp.use_chars);
  w.put<std::uint8_t>(hp.single_root);
  w.put<std::uint8_t>(hp.global_arc_loss);
}

Hyperparams read_hyper(ByteReader& r) {
  Hyperparams hp;
  hp.char_dim = r.get<std::int32_t>();
  hp.char_hidden_dim = r.get<std::int32_t>();
  hp.word_dim = r.get<std::int32_t>();
  hp.ctx_state_dim = r.get<std::int32_t>();
  hp.ctx_layers = r.get<std::int32_t>();
  hp.mlp_hidden = r.get<std::int32_t>();
  hp.epochs = r.get<std::int32_t>();
  hp.word_dropout_alpha = r.get<double>();
  hp.noise_sigma = r.get<double>();
  hp.margin = r.get<double>();
  hp.seed = r.get<std::uint64_t>();
  hp.use_chars = r.get<std::uint8_t>() != 0;
  hp.single_root = r.get<std::uint8_t>() != 0;
  hp.global_arc_loss = r.get<std::uint8_t>() != 0;
  return hp;
}

void with_sentence_context(const std::vector<Sentence>& bank, const char* which) {
  for (std::size_t i = 0; i < bank.size(); ++i) {
    try {
      if (bank[i].size() > 0) validate_tree(bank[i]);
    } catch (const DataError& e) {
      throw DataError(std::string(which) + " sentence " + std::to_string(i + 1) + ": " +
                      e.what());
    }
  }
}

}  // namespace

JointModel Checkpoint::to_model() const {
  std::mt19937_64 rng(hyper.seed);
  JointModel model(hyper, vocab, rng);
  std::vector<ParamTensor*> params = model.params();
  if (params.size() != tensors.size())
    throw IntegrityError("checkpoint holds " + std::to_string(tensors.size()) +
                         " tensors, model expects " + std::to_string(params.size()));
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : tensors) by_name.emplace(name, &t);
  for (ParamTensor* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw IntegrityError("checkpoint missing tensor " + p->name);
    if (!p->value.same_shape(*it->second))
      throw IntegrityError("checkpoint tensor " + p->name + " has shape " +
                           it->second->shape_str() + ", expected " + p->value.shape_str());
    p->value = *it->second;
  }
  return model;
}

Checkpoint make_checkpoint(JointModel& model, real best_dev_mixed, int best_epoch) {
  Checkpoint c;
  c.hyper = model.hp;
  c.vocab = model.vocab;
  for (ParamTensor* p : model.params()) c.tensors.emplace_back(p->name, p->value);
  c.best_dev_mixed = best_dev_mixed;
  c.best_epoch = best_epoch;
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  ByteWriter w;
  w.put<std::uint32_t>(Checkpoint::kFormatVersion);
  write_hyper(w, checkpoint.hyper);
  w.put_strings(checkpoint.vocab.words);
  w.put<std::uint64_t>(checkpoint.vocab.word_freq.size());
  for (std::int64_t f : checkpoint.vocab.word_freq) w.put<std::int64_t>(f);
  w.put_strings(checkpoint.vocab.chars);
  w.put_strings(checkpoint.vocab.upos);
  w.put_strings(checkpoint.vocab.rels);
  w.put<double>(checkpoint.best_dev_mixed);
  w.put<std::int32_t>(checkpoint.best_epoch);
  w.put<std::uint64_t>(checkpoint.tensors.size());
  for (const auto& [name, t] : checkpoint.tensors) {
    w.put_string(name);
    w.put<std::uint32_t>(t.rank());
    for (int d : t.shape) w.put<std::uint64_t>(d);
    for (real v : t.data) w.put<double>(v);
  }
  w.put<std::uint64_t>(fnv1a(w.buf.data(), w.buf.size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
  if (!out) throw IoError("failed writing " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 12) throw IntegrityError("checkpoint too small");

  std::string payload = buf.substr(0, buf.size() - 8);
  std::uint64_t stored;
  std::memcpy(&stored, buf.data() + buf.size() - 8, 8);
  if (fnv1a(payload.data(), payload.size()) != stored)
    throw IntegrityError("checkpoint checksum mismatch");

  ByteReader r{payload};
  auto version = r.get<std::uint32_t>();
  if (version != Checkpoint::kFormatVersion)
    throw VersionError("checkpoint format version " + std::to_string(version) +
                       ", expected " + std::to_string(Checkpoint::kFormatVersion));
  Checkpoint c;
  c.hyper = read_hyper(r);
  c.vocab.words = r.get_strings();
  auto nfreq = r.get<std::uint64_t>();
  c.vocab.word_freq.reserve(nfreq);
  for (std::uint64_t i = 0; i < nfreq; ++i)
    c.vocab.word_freq.push_back(r.get<std::int64_t>());
  c.vocab.chars = r.get_strings();
  c.vocab.upos = r.get_strings();
  c.vocab.rels = r.get_strings();
  c.vocab.rebuild_maps();
  c.best_dev_mixed = r.get<double>();
  c.best_epoch = r.get<std::int32_t>();
  auto ntensors = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < ntensors; ++i) {
    std::string name = r.get_string();
    auto rank = r.get<std::uint32_t>();
    if (rank < 1 || rank > 2)
      throw IntegrityError("checkpoint tensor " + name + " has rank " +
                           std::to_string(rank));
    Tensor t;
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      auto dim = r.get<std::uint64_t>();
      t.shape.push_back(static_cast<int>(dim));
      total *= dim;
    }
    t.data.reserve(total);
    for (std::size_t k = 0; k < total; ++k) t.data.push_back(r.get<double>());
    c.tensors.emplace_back(std::move(name), std::move(t));
  }
  if (r.pos != payload.size()) throw IntegrityError("checkpoint has trailing bytes");
  return c;
}

std::vector<Sentence> predict_treebank(JointModel& model,
                                       const std::vector<Sentence>& input) {
  std::vector<Sentence> out = input;
  for (Sentence& s : out) {
    if (s.size() == 0) continue;
    apply_prediction(model.predict(s), model.vocab, s);
  }
  return out;
}

TrainOutcome train_on(const std::vector<Sentence>& train,
                      const std::vector<Sentence>& dev, const Hyperparams& hyper,
                      bool shuffle, std::ostream* log) {
  hyper.validate();
  if (train.empty()) throw ConfigError("empty training set");
  if (dev.empty()) throw ConfigError("empty development set");
  with_sentence_context(train, "train");
  with_sentence_context(dev, "dev");

  std::vector<int> order;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (train[i].size() > 0) order.push_back(static_cast<int>(i));
  if (order.empty()) throw ConfigError("training set has no non-empty sentences");

  std::mt19937_64 rng(hyper.seed);
  JointModel model(hyper, build_vocab(train), rng);
  std::vector<ParamTensor*> params = model.params();

  std::vector<Tensor> best_values;
  real best_mixed = -1;
  int best_epoch = 0;
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    if (shuffle) std::shuffle(order.begin(), order.end(), rng);
    real total_loss = 0;
    for (int idx : order) {
      Graph g;
      NodeRef loss = model.joint_loss(g, train[idx], true, rng);
      real value = g.value(loss)(0);
      if (!std::isfinite(value))
        throw NumericError("epoch " + std::to_string(epoch) + ", sentence " +
                           std::to_string(idx + 1) + ": non-finite loss");
      total_loss += value;
      g.backward(loss);
      adam_update(params);
    }
    Metrics m = evaluate(dev, predict_treebank(model, dev));
    if (m.mixed > best_mixed) {
      best_mixed = m.mixed;
      best_epoch = epoch;
      best_values.clear();
      for (ParamTensor* p : params) best_values.push_back(p->value);
    }
    if (log) {
      *log << "epoch " << epoch << "/" << hyper.epochs << std::fixed
           << std::setprecision(4) << " loss " << total_loss / order.size()
           << " dev upos " << m.upos_acc << " uas " << m.uas << " las " << m.las
           << " mixed " << m.mixed << std::defaultfloat << '\n';
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  if (log)
    *log << "best epoch " << best_epoch << " dev mixed " << std::fixed
         << std::setprecision(4) << best_mixed << std::defaultfloat << '\n';
  return {std::move(model), best_mixed, best_epoch};
}

TrainOutcome train(const TrainConfig& config, std::ostream* log) {
  std::vector<Sentence> all = read_conllu_file(config.train_path);
  std::vector<Sentence> train_part, dev_part;
  if (config.dev_path.empty()) {
    std::size_t cut = all.size() * 4 / 5;
    if (cut == 0)
      throw ConfigError("training set of " + std::to_string(all.size()) +
                        " sentences is too small for a 4:1 split");
    train_part.assign(all.begin(), all.begin() + cut);
    dev_part.assign(all.begin() + cut, all.end());
  } else {
    train_part = std::move(all);
    dev_part = read_conllu_file(config.dev_path);
  }
  TrainOutcome outcome = train_on(train_part, dev_part, config.hyper, config.shuffle, log);
  if (!config.model_path.empty())
    save_checkpoint(config.model_path,
                    make_checkpoint(outcome.model, outcome.best_dev_mixed,
                                    outcome.best_epoch));
  return outcome;
}

}  // namespace jptdp
