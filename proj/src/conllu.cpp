#include "jptdp/conllu.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "jptdp/errors.h"

namespace jptdp {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

void Token::set_head(int h) {
  if (h < 0) throw ContractError("set_head: negative head " + std::to_string(h));
  head = h;
  cols[6] = std::to_string(h);
}

std::vector<Sentence> read_conllu(std::istream& in) {
  std::vector<Sentence> sentences;
  Sentence cur;
  int line_no = 0;

  auto flush = [&] {
    if (!cur.lines.empty()) {
      sentences.push_back(std::move(cur));
      cur = Sentence();
    }
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      cur.lines.push_back({Sentence::Line::Kind::kComment, line, -1});
      continue;
    }
    std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 10)
      fail(line_no, "expected 10 columns, got " + std::to_string(cols.size()));
    const std::string& id = cols[0];
    if (id.find('-') != std::string::npos) {
      cur.lines.push_back({Sentence::Line::Kind::kRange, line, -1});
      continue;
    }
    if (id.find('.') != std::string::npos) {
      cur.lines.push_back({Sentence::Line::Kind::kEmptyNode, line, -1});
      continue;
    }
    if (!all_digits(id)) fail(line_no, "bad token ID '" + id + "'");
    Token tok;
    for (int i = 0; i < 10; ++i) tok.cols[i] = cols[i];
    tok.id = std::stoi(id);
    if (tok.id != static_cast<int>(cur.tokens.size()) + 1)
      fail(line_no, "token ID " + id + " out of sequence, expected " +
                        std::to_string(cur.tokens.size() + 1));
    const std::string& head = cols[6];
    if (head == "_") {
      tok.head = -1;
    } else if (all_digits(head)) {
      tok.head = std::stoi(head);
    } else {
      fail(line_no, "bad HEAD '" + head + "'");
    }
    cur.lines.push_back(
        {Sentence::Line::Kind::kToken, std::string(), static_cast<int>(cur.tokens.size())});
    cur.tokens.push_back(std::move(tok));
  }
  flush();
  return sentences;
}

std::vector<Sentence> read_conllu_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_conllu(in);
}

void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences) {
  for (const Sentence& s : sentences) {
    for (const Sentence::Line& line : s.lines) {
      if (line.kind == Sentence::Line::Kind::kToken) {
        const Token& t = s.tokens[line.token];
        for (int i = 0; i < 10; ++i) {
          if (i) out << '\t';
          out << t.cols[i];
        }
        out << '\n';
      } else {
        out << line.raw << '\n';
      }
    }
    out << '\n';
  }
}

void write_conllu_file(const std::string& path, const std::vector<Sentence>& sentences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_conllu(out, sentences);
}

void validate_tree(const Sentence& s) {
  int n = s.size();
  std::vector<std::vector<int>> children(n + 1);
  for (const Token& t : s.tokens) {
    if (t.head < 0 || t.head > n)
      throw DataError("token " + std::to_string(t.id) + ": head " +
                      std::to_string(t.head) + " outside [0, " + std::to_string(n) + "]");
    if (t.head == t.id)
      throw DataError("token " + std::to_string(t.id) + " is its own head");
    children[t.head].push_back(t.id);
  }
  if (n > 0 && children[0].empty()) throw DataError("no token attaches to root");
  std::vector<bool> seen(n + 1, false);
  std::vector<int> stack = {0};
  seen[0] = true;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int c : children[v]) {
      seen[c] = true;
      stack.push_back(c);
    }
  }
  for (int i = 1; i <= n; ++i)
    if (!seen[i])
      throw DataError("token " + std::to_string(i) + " unreachable from root (cycle)");
}

}  // namespace jptdp
