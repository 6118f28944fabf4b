#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "jptdp/evaluator.h"
#include "jptdp/model.h"

namespace jptdp {

struct TrainConfig {
  std::string train_path;
  std::string dev_path;    // empty: last fifth of train held out as dev
  std::string model_path;  // empty: do not persist a checkpoint
  Hyperparams hyper;
  bool shuffle = true;
};

// Inference snapshot: everything needed to rebuild a model that predicts
// bit-identically. Adam state is deliberately not included.
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  Hyperparams hyper;
  Vocab vocab;
  std::vector<std::pair<std::string, Tensor>> tensors;  // params() order
  real best_dev_mixed = 0;
  std::int32_t best_epoch = 0;  // 1-based

  JointModel to_model() const;
};

struct TrainOutcome {
  JointModel model;  // parameters of the best epoch
  real best_dev_mixed = 0;
  int best_epoch = 0;
};

// One epoch = one pass over the shuffled training sentences, one Adam update
// per sentence. After each epoch dev mixed accuracy is measured in inference
// mode; the best epoch's parameters (ties keep the earlier epoch) are
// restored before returning. log, when set, receives one line per epoch and
// a final best-epoch summary.
TrainOutcome train_on(const std::vector<Sentence>& train,
                      const std::vector<Sentence>& dev, const Hyperparams& hyper,
                      bool shuffle, std::ostream* log);

// File-level wrapper: reads treebanks, applies the 4:1 split when no dev
// path is given, trains, and saves the checkpoint when model_path is set.
TrainOutcome train(const TrainConfig& config, std::ostream* log);

Checkpoint make_checkpoint(JointModel& model, real best_dev_mixed, int best_epoch);
// Binary little-endian container: version, hyperparameters, vocabularies,
// named tensor records, and a trailing FNV-1a checksum over everything
// before it. Throws IntegrityError on corruption, VersionError on an
// unsupported format version.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

// Copies the treebank and fills UPOS/HEAD/DEPREL with model predictions.
std::vector<Sentence> predict_treebank(JointModel& model,
                                       const std::vector<Sentence>& input);

}  // namespace jptdp
