#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace jptdp {

// One syntactic word (plain integer ID line). The ten tab-separated columns
// are kept verbatim so an unmodified sentence writes back byte for byte.
struct Token {
  std::array<std::string, 10> cols;
  int id = 0;
  int head = -1;  // parsed HEAD column, -1 when "_"

  const std::string& form() const { return cols[1]; }
  const std::string& lemma() const { return cols[2]; }
  const std::string& upos() const { return cols[3]; }
  const std::string& deprel() const { return cols[7]; }

  void set_upos(const std::string& tag) { cols[3] = tag; }
  void set_head(int h);
  void set_deprel(const std::string& rel) { cols[7] = rel; }
};

// A sentence block: tokens for modeling plus the full ordered line layout
// (comments, multiword ranges, empty nodes) for faithful output.
struct Sentence {
  struct Line {
    enum class Kind { kComment, kRange, kEmptyNode, kToken };
    Kind kind;
    std::string raw;  // verbatim for non-token kinds
    int token = -1;   // index into tokens for kToken
  };

  std::vector<Line> lines;
  std::vector<Token> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
};

// Reads all sentences. Throws ParseError naming the 1-based line number on a
// malformed line (wrong column count, bad ID/HEAD, non-consecutive IDs).
std::vector<Sentence> read_conllu(std::istream& in);
std::vector<Sentence> read_conllu_file(const std::string& path);

// Writes each sentence as its lines in order followed by one blank line.
void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences);
void write_conllu_file(const std::string& path, const std::vector<Sentence>& sentences);

// Checks heads form a tree rooted at 0: every head in [0, n], at least one
// root, all tokens reachable. Throws DataError otherwise. Accepts multiple
// roots (still a forest hanging off node 0).
void validate_tree(const Sentence& s);

}  // namespace jptdp
