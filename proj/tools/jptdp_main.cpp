#include <chrono>
#include <iomanip>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "jptdp/errors.h"
#include "jptdp/evaluator.h"
#include "jptdp/trainer.h"

namespace {

using jptdp::Hyperparams;

struct TrainFlags {
  jptdp::TrainConfig config;
  bool no_chars = false;
  bool multi_root = false;
};

void add_train(CLI::App& app, TrainFlags& f) {
  CLI::App* cmd = app.add_subcommand("train", "train a joint tagger-parser");
  cmd->add_option("--train", f.config.train_path, "training treebank (CoNLL-U)")
      ->required();
  cmd->add_option("--dev", f.config.dev_path,
                  "development treebank; omit to hold out the last fifth of --train");
  cmd->add_option("--model", f.config.model_path, "checkpoint output path")->required();
  Hyperparams& hp = f.config.hyper;
  cmd->add_option("--epochs", hp.epochs, "training epochs")->capture_default_str();
  cmd->add_option("--seed", hp.seed, "random seed")
      ->envname("JPTDP_SEED")
      ->capture_default_str();
  cmd->add_option("--word-dim", hp.word_dim, "word embedding size")->capture_default_str();
  cmd->add_option("--char-dim", hp.char_dim, "character embedding size")
      ->capture_default_str();
  cmd->add_option("--char-hidden-dim", hp.char_hidden_dim,
                  "character BiLSTM state size per direction")
      ->capture_default_str();
  cmd->add_option("--ctx-dim", hp.ctx_state_dim, "context BiLSTM state size per direction")
      ->capture_default_str();
  cmd->add_option("--layers", hp.ctx_layers, "context BiLSTM layers")
      ->capture_default_str();
  cmd->add_option("--mlp-hidden", hp.mlp_hidden, "scorer MLP hidden size")
      ->capture_default_str();
  cmd->add_option("--word-dropout", hp.word_dropout_alpha, "word dropout alpha")
      ->capture_default_str();
  cmd->add_option("--noise-sigma", hp.noise_sigma, "input Gaussian noise sigma")
      ->capture_default_str();
  cmd->add_option("--margin", hp.margin, "hinge loss margin")->capture_default_str();
  cmd->add_flag("--no-chars", f.no_chars, "disable the character channel");
  cmd->add_flag("--multi-root", f.multi_root, "allow multiple root attachments");
  cmd->add_flag("--global-arc-loss", hp.global_arc_loss,
                "single hinge over tree scores instead of the per-position sum");
  cmd->add_flag("!--no-shuffle", f.config.shuffle, "keep corpus order every epoch");
}

int run_train(TrainFlags& f) {
  f.config.hyper.use_chars = !f.no_chars;
  f.config.hyper.single_root = !f.multi_root;
  jptdp::train(f.config, &std::cout);
  std::cerr << "checkpoint written to " << f.config.model_path << '\n';
  return 0;
}

struct PredictFlags {
  std::string model, input, output;
};

void add_predict(CLI::App& app, PredictFlags& f) {
  CLI::App* cmd = app.add_subcommand("predict", "tag and parse a treebank");
  cmd->add_option("--model", f.model, "checkpoint path")->required();
  cmd->add_option("--input", f.input, "input CoNLL-U (UPOS/HEAD/DEPREL may be _)")
      ->required();
  cmd->add_option("--output", f.output, "output CoNLL-U path")->required();
}

int run_predict(const PredictFlags& f) {
  jptdp::JointModel model = jptdp::load_checkpoint(f.model).to_model();
  std::vector<jptdp::Sentence> input = jptdp::read_conllu_file(f.input);
  std::int64_t words = 0;
  for (const jptdp::Sentence& s : input) words += s.size();

  auto start = std::chrono::steady_clock::now();
  std::vector<jptdp::Sentence> output = jptdp::predict_treebank(model, input);
  std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  jptdp::write_conllu_file(f.output, output);
  double rate = elapsed.count() > 0 ? static_cast<double>(words) / elapsed.count() : 0;
  std::cerr << "predicted " << words << " words in " << std::fixed
            << std::setprecision(2) << elapsed.count() << " s (" << std::setprecision(0)
            << rate << " words/s)\n";
  return 0;
}

struct EvalFlags {
  std::string gold, pred;
  jptdp::EvalOptions options;
  bool exclude_punct = false;
  bool json = false;
};

void add_eval(CLI::App& app, EvalFlags& f) {
  CLI::App* cmd = app.add_subcommand("eval", "score predictions against gold");
  cmd->add_option("--gold", f.gold, "gold treebank")->required();
  cmd->add_option("--pred", f.pred, "predicted treebank")->required();
  cmd->add_flag("--exclude-punct", f.exclude_punct,
                "drop tokens whose gold UPOS is PUNCT");
  cmd->add_flag("--strip-deprel-subtypes", f.options.strip_deprel_subtypes,
                "compare deprels up to the first ':'");
  cmd->add_flag("--json", f.json, "emit a JSON report instead of key=value lines");
}

int run_eval(EvalFlags& f) {
  f.options.include_punct = !f.exclude_punct;
  jptdp::Metrics m = jptdp::evaluate(jptdp::read_conllu_file(f.gold),
                                     jptdp::read_conllu_file(f.pred), f.options);
  if (f.json) {
    nlohmann::json report{{"upos", m.upos_acc},
                          {"uas", m.uas},
                          {"las", m.las},
                          {"mixed", m.mixed},
                          {"tokens", m.token_count}};
    std::cout << report.dump() << '\n';
  } else {
    std::cout << std::fixed << std::setprecision(4) << "upos=" << m.upos_acc << '\n'
              << "uas=" << m.uas << '\n'
              << "las=" << m.las << '\n'
              << "mixed=" << m.mixed << '\n'
              << "tokens=" << m.token_count << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint POS tagging and graph-based dependency parsing"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  PredictFlags predict_flags;
  EvalFlags eval_flags;
  add_train(app, train_flags);
  add_predict(app, predict_flags);
  add_eval(app, eval_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand("train")) return run_train(train_flags);
    if (app.got_subcommand("predict")) return run_predict(predict_flags);
    return run_eval(eval_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
