#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sstream>

#include "doctest.h"
#include "jptdp/conllu.h"
#include "jptdp/errors.h"
#include "testutil.h"

using jptdp::ParseError;
using jptdp::read_conllu;
using jptdp::read_conllu_file;
using jptdp::Sentence;
using jptdp::validate_tree;
using jptdp::write_conllu;

namespace {

const std::string kDataDir = JPTDP_TEST_DATA_DIR;

std::vector<Sentence> parse(const std::string& text) {
  std::istringstream in(text);
  return read_conllu(in);
}

std::string render(const std::vector<Sentence>& sentences) {
  std::ostringstream out;
  write_conllu(out, sentences);
  return out.str();
}

}  // namespace

TEST_CASE("reads tokens, comments, and parsed fields") {
  auto bank = read_conllu_file(kDataDir + "/basic.conllu");
  REQUIRE(bank.size() == 2);
  const Sentence& s = bank[0];
  CHECK(s.size() == 3);
  CHECK(s.lines.size() == 5);  // two comments, three tokens
  CHECK(s.lines[0].kind == Sentence::Line::Kind::kComment);
  CHECK(s.lines[0].raw == "# sent_id = basic-1");
  CHECK(s.tokens[0].form() == "The");
  CHECK(s.tokens[0].upos() == "DET");
  CHECK(s.tokens[0].head == 2);
  CHECK(s.tokens[0].deprel() == "det");
  CHECK(s.tokens[2].head == 0);
  CHECK(bank[1].tokens[1].form() == "!");
}

TEST_CASE("multiword ranges and empty nodes are kept but not tokens") {
  auto bank = read_conllu_file(kDataDir + "/tricky.conllu");
  REQUIRE(bank.size() == 4);
  const Sentence& mwt = bank[0];
  CHECK(mwt.size() == 5);
  int ranges = 0;
  for (const auto& line : mwt.lines) ranges += line.kind == Sentence::Line::Kind::kRange;
  CHECK(ranges == 2);

  const Sentence& en = bank[1];
  CHECK(en.size() == 5);
  bool saw_empty = false;
  for (const auto& line : en.lines)
    if (line.kind == Sentence::Line::Kind::kEmptyNode) {
      saw_empty = true;
      CHECK(line.raw.substr(0, 3) == "3.1");
    }
  CHECK(saw_empty);

  CHECK(bank[2].tokens[0].form() == "Привет");
  CHECK(bank[3].tokens[1].form() == "走った");
}

TEST_CASE("read then write is byte-identical on every fixture") {
  for (const char* name : {"/basic.conllu", "/tricky.conllu"}) {
    std::string original = testutil::read_file(kDataDir + name);
    CHECK(render(read_conllu_file(kDataDir + name)) == original);
  }
}

TEST_CASE("round trip survives a temp-file rewrite") {
  testutil::TempDir dir;
  auto bank = read_conllu_file(kDataDir + "/tricky.conllu");
  std::string out = dir.file("copy.conllu");
  jptdp::write_conllu_file(out, bank);
  CHECK(testutil::read_file(out) == testutil::read_file(kDataDir + "/tricky.conllu"));
}

TEST_CASE("malformed input names the offending line") {
  auto check_message = [](const std::string& text, const std::string& needle) {
    try {
      parse(text);
      FAIL("expected ParseError for: " << needle);
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  check_message("1\tword\t_\tX\t_\t_\t0\troot\t_\n", "line 1");  // 9 columns
  check_message("# ok\nbad\tword\t_\tX\t_\t_\t0\troot\t_\t_\n", "line 2");
  check_message("2\tword\t_\tX\t_\t_\t0\troot\t_\t_\n", "out of sequence");
  check_message("1\tword\t_\tX\t_\t_\tzero\troot\t_\t_\n", "HEAD");
}

TEST_CASE("carriage returns are stripped") {
  auto bank = parse("1\tok\t_\tX\t_\t_\t0\troot\t_\t_\r\n\r\n");
  REQUIRE(bank.size() == 1);
  CHECK(bank[0].tokens[0].cols[9] == "_");
}

TEST_CASE("missing trailing blank line still flushes the last sentence") {
  auto bank = parse("1\tok\t_\tX\t_\t_\t0\troot\t_\t_");
  REQUIRE(bank.size() == 1);
  CHECK(bank[0].size() == 1);
}

TEST_CASE("underscore head parses as absent") {
  auto bank = parse("1\tok\t_\tX\t_\t_\t_\t_\t_\t_\n\n");
  CHECK(bank[0].tokens[0].head == -1);
}

TEST_CASE("setters keep columns and parsed fields in sync") {
  auto bank = read_conllu_file(kDataDir + "/basic.conllu");
  jptdp::Token& t = bank[0].tokens[0];
  t.set_upos("NOUN");
  t.set_head(3);
  t.set_deprel("nmod");
  CHECK(t.cols[3] == "NOUN");
  CHECK(t.cols[6] == "3");
  CHECK(t.cols[7] == "nmod");
  CHECK(t.head == 3);
  std::string text = render(bank);
  CHECK(text.find("1\tThe\tthe\tNOUN\tDT\tDefinite=Def|PronType=Art\t3\tnmod\t_\t_") !=
        std::string::npos);
}

TEST_CASE("validate_tree accepts trees and rejects defects") {
  using testutil::make_sentence;
  CHECK_NOTHROW(validate_tree(make_sentence({{"a", "X", 2, "dep"},
                                             {"b", "X", 0, "root"},
                                             {"c", "X", 2, "dep"}})));
  // multiple attachments to 0 are still a valid forest
  CHECK_NOTHROW(validate_tree(make_sentence({{"a", "X", 0, "root"},
                                             {"b", "X", 0, "root"}})));
  auto expect_error = [](const Sentence& s, const std::string& needle) {
    try {
      validate_tree(s);
      FAIL("expected DataError: " << needle);
    } catch (const jptdp::DataError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error(make_sentence({{"a", "X", 2, "dep"}, {"b", "X", 1, "dep"}}),
               "no token attaches to root");
  expect_error(make_sentence({{"a", "X", 0, "root"},
                              {"b", "X", 3, "dep"},
                              {"c", "X", 2, "dep"}}),
               "unreachable");
  expect_error(make_sentence({{"a", "X", 1, "dep"}}), "its own head");
  expect_error(make_sentence({{"a", "X", 5, "dep"}}), "outside");
  expect_error(make_sentence({{"a", "X", 0, "root"}, {"b", "X", 9, "dep"}}), "outside");
}

TEST_CASE("comment-only blocks and empty input") {
  CHECK(parse("").empty());
  auto bank = parse("# lone comment\n\n");
  REQUIRE(bank.size() == 1);
  CHECK(bank[0].size() == 0);
  CHECK(render(bank) == "# lone comment\n\n");
}
