#include "helpers.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace testutil {

using relex::AnnotatedSentence;
using relex::Corpus;
using relex::Relation;
using relex::RunConfig;

namespace {

AnnotatedSentence sent(std::vector<std::string> tokens, std::vector<std::string> tags,
                       std::vector<Relation> relations = {}) {
  AnnotatedSentence s;
  s.tokens = std::move(tokens);
  s.entity_tags = std::move(tags);
  s.relations = std::move(relations);
  return s;
}

}  // namespace

Corpus overfit_corpus() {
  Corpus c;
  c.push_back(sent({"anna", "works", "at", "acme", "."}, {"U-Per", "O", "O", "U-Org", "O"},
                   {{0, 3, "Works_At"}}));
  c.push_back(sent({"bob", "works", "at", "globex", "."}, {"U-Per", "O", "O", "U-Org", "O"},
                   {{0, 3, "Works_At"}}));
  c.push_back(sent({"acme", "is", "in", "berlin", "."}, {"U-Org", "O", "O", "U-Loc", "O"},
                   {{0, 3, "Located_In"}}));
  c.push_back(sent({"globex", "is", "in", "paris", "."}, {"U-Org", "O", "O", "U-Loc", "O"},
                   {{0, 3, "Located_In"}}));
  c.push_back(sent({"anna", "visited", "paris", "."}, {"U-Per", "O", "U-Loc", "O"}));
  c.push_back(sent({"carol", "den", "haag", "leads", "acme", "."},
                   {"B-Per", "I-Per", "L-Per", "O", "U-Org", "O"}, {{2, 4, "Works_At"}}));
  c.push_back(sent({"bob", "visited", "berlin", "."}, {"U-Per", "O", "U-Loc", "O"}));
  c.push_back(sent({"initech", "is", "in", "oslo", "."}, {"U-Org", "O", "O", "U-Loc", "O"},
                   {{0, 3, "Located_In"}}));
  c.push_back(sent({"dave", "works", "at", "initech", "."}, {"U-Per", "O", "O", "U-Org", "O"},
                   {{0, 3, "Works_At"}}));
  c.push_back(sent({"erin", "works", "at", "acme", "."}, {"U-Per", "O", "O", "U-Org", "O"},
                   {{0, 3, "Works_At"}}));
  return c;
}

Corpus gradient_corpus() {
  Corpus c;
  c.push_back(sent({"ana", "met", "bo", "."}, {"U-Per", "O", "U-Per", "O"}));
  c.push_back(sent({"acme", "corp", "inc", "hired", "ana", "."},
                   {"B-Org", "I-Org", "L-Org", "O", "U-Per", "O"}, {{4, 2, "Works_At"}}));
  c.push_back(sent({"bo", "lives", "in", "rome", "."}, {"U-Per", "O", "O", "U-Loc", "O"},
                   {{0, 3, "Lives_In"}}));
  return c;
}

AnnotatedSentence reporter_sentence() {
  return sent({"David", "Foster", "is", "the", "AP", "'s", "Northwest", "regional", "reporter"},
              {"B-Peop", "L-Peop", "O", "O", "U-Org", "O", "O", "O", "O"}, {{1, 4, "Work_For"}});
}

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.word_dim = 6;
  cfg.char_dim = 3;
  cfg.label_dim = 4;
  cfg.boundary_dim = 3;
  cfg.ffnn_dim = 5;
  cfg.hidden_dim = 4;
  cfg.lstm_layers = 2;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

std::string temp_path(const std::string& name) {
  namespace fs = std::filesystem;
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("relex-tests-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  static std::atomic<int> counter{0};
  return (dir / (std::to_string(counter.fetch_add(1)) + "-" + name)).string();
}

}  // namespace testutil
