#include "jptdp/evaluator.h"

#include <string>
#include <unordered_set>

#include "jptdp/errors.h"
#include "jptdp/utf8.h"

namespace jptdp {

namespace {

std::string base_rel(const std::string& rel, bool strip) {
  if (!strip) return rel;
  return rel.substr(0, rel.find(':'));
}

[[noreturn]] void mismatch(std::size_t sentence, const std::string& what) {
  throw EvalError("sentence " + std::to_string(sentence + 1) + ": " + what);
}

}  // namespace

Metrics evaluate(const std::vector<Sentence>& gold, const std::vector<Sentence>& pred,
                 const EvalOptions& opts) {
  if (gold.size() != pred.size())
    throw EvalError("treebank size mismatch: " + std::to_string(gold.size()) +
                    " gold vs " + std::to_string(pred.size()) + " predicted sentences");
  std::int64_t total = 0, tag_ok = 0, head_ok = 0, labeled_ok = 0, all_ok = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const Sentence& gs = gold[i];
    const Sentence& ps = pred[i];
    if (gs.size() != ps.size())
      mismatch(i, "token count " + std::to_string(gs.size()) + " vs " +
                      std::to_string(ps.size()));
    for (int k = 0; k < gs.size(); ++k) {
      const Token& gt = gs.tokens[k];
      const Token& pt = ps.tokens[k];
      if (gt.form() != pt.form())
        mismatch(i, "form '" + gt.form() + "' vs '" + pt.form() + "' at token " +
                        std::to_string(k + 1));
      if (gt.head < 0) mismatch(i, "missing gold head at token " + std::to_string(k + 1));
      if (!opts.include_punct && gt.upos() == "PUNCT") continue;
      ++total;
      bool tag = gt.upos() == pt.upos();
      bool head = gt.head == pt.head;
      bool label = head && base_rel(gt.deprel(), opts.strip_deprel_subtypes) ==
                               base_rel(pt.deprel(), opts.strip_deprel_subtypes);
      tag_ok += tag;
      head_ok += head;
      labeled_ok += label;
      all_ok += tag && label;
    }
  }
  Metrics m;
  m.token_count = total;
  if (total > 0) {
    m.upos_acc = static_cast<real>(tag_ok) / total;
    m.uas = static_cast<real>(head_ok) / total;
    m.las = static_cast<real>(labeled_ok) / total;
    m.mixed = static_cast<real>(all_ok) / total;
  }
  return m;
}

real oov_rate(const std::vector<Sentence>& train, const std::vector<Sentence>& test) {
  if (train.empty() || test.empty()) throw EvalError("oov_rate: empty treebank");
  std::unordered_set<std::string> known;
  for (const Sentence& s : train)
    for (const Token& t : s.tokens) known.insert(lowercased(t.form()));
  std::int64_t total = 0, unseen = 0;
  for (const Sentence& s : test)
    for (const Token& t : s.tokens) {
      ++total;
      unseen += known.count(lowercased(t.form())) == 0;
    }
  return total == 0 ? real(0) : static_cast<real>(unseen) / total;
}

}  // namespace jptdp
