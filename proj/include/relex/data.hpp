#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relex/rng.hpp"
#include "relex/tensor.hpp"

namespace relex {

inline constexpr const char* kUnk = "<unk>";
inline constexpr const char* kNeg = "NEG";
inline constexpr const char* kUntagged = "-";

// Directed typed relation; endpoints are indices of entity-final tokens.
struct Relation {
  int head = 0;
  int tail = 0;
  std::string label;
  bool operator==(const Relation&) const = default;
};

struct AnnotatedSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> entity_tags;  // empty when the sentence is untagged
  std::vector<Relation> relations;
};

using Corpus = std::vector<AnnotatedSentence>;

struct EntitySpan {
  int start = 0;
  int end = 0;  // inclusive
  std::string label;
  bool operator==(const EntitySpan&) const = default;
};

// Corpus block format: sentences separated by blank lines; token lines
// "index<TAB>word<TAB>tag" (tag "-" marks an untagged sentence), then
// relation lines "R<TAB>head_index<TAB>tail_index<TAB>label". Gold relation
// endpoints may name any token of an entity; they are remapped to the span's
// last token here.
Corpus parse_corpus_text(const std::string& text);
Corpus parse_corpus(const std::string& path);
std::string corpus_to_text(const Corpus& corpus);
void write_corpus(const Corpus& corpus, const std::string& path);

// BILOU codec. Decoding repairs invalid sequences: scanning left to right,
// an I or L with no matching open B opens a span at that token; an unclosed
// B closes at the last contiguous same-type token; a type conflict closes
// the open span just before the conflicting tag; a span still open at the
// end closes at the final token.
std::vector<std::string> spans_to_bilou(const std::vector<EntitySpan>& spans, int len);
std::vector<EntitySpan> bilou_to_spans(const std::vector<std::string>& tags);
bool bilou_valid(const std::vector<std::string>& tags);

// Splits "B-Peop" into {'B', "Peop"}; "O" becomes {'O', ""}.
std::pair<char, std::string> tag_parse(const std::string& tag);

// Bidirectional symbol/id map; ids are dense and assigned in insertion order.
class SymbolTable {
 public:
  int add(const std::string& symbol);
  int id(const std::string& symbol) const;  // -1 when absent
  const std::string& symbol(int id) const;
  bool has(const std::string& symbol) const { return ids_.count(symbol) != 0; }
  int size() const { return static_cast<int>(symbols_.size()); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  bool operator==(const SymbolTable& other) const { return symbols_ == other.symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> ids_;
};

// Symbol spaces fixed by the training corpus. Reserved entries: word and
// char id 0 are "<unk>", relation id 0 is NEG, entity tag id 0 is O. The
// tag table is systematic: O then B/I/L/U per entity class in first-seen
// order, so decoding can always emit any boundary of a known class.
struct Vocabularies {
  SymbolTable words;
  SymbolTable chars;
  SymbolTable tags;
  SymbolTable boundaries;  // B, I, O, L, U
  SymbolTable relations;
  std::unordered_map<std::string, long long> word_counts;
  std::vector<std::string> entity_classes;

  static Vocabularies build(const Corpus& train);
  int boundary_id_of_tag(const std::string& tag) const;
  bool operator==(const Vocabularies& other) const;
};

// UTF-8 code points as byte chunks; an invalid byte stands alone.
std::vector<std::string> utf8_codepoints(const std::string& word);

double unk_probability(long long count);

// Training: word becomes "<unk>" with probability 0.25/(0.25+count).
// Evaluation: out-of-vocabulary words become "<unk>", known words pass through.
std::string word_dropout_replace(const std::string& word,
                                 const std::unordered_map<std::string, long long>& counts,
                                 RngStream& rng, bool training);

// Overwrites rows of word_emb for words found in a whitespace-separated
// "word v1 ... vD" file; the last occurrence of a word wins.
// Returns the number of rows written.
int load_pretrained_words(const std::string& path, const SymbolTable& words, Tensor word_emb);

}  // namespace relex
