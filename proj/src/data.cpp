#include "relex/data.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "relex/errors.hpp"

namespace relex {

namespace {

int parse_int(const std::string& field, int line_no, const char* what) {
  try {
    size_t used = 0;
    const int v = std::stoi(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": bad " + what + " '" + field + "'");
  }
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

struct RawRelation {
  int head, tail, line_no;
  std::string label;
};

void flush_sentence(Corpus& corpus, std::vector<std::string>& tokens,
                    std::vector<std::string>& tags, std::vector<RawRelation>& rels,
                    int first_line) {
  if (tokens.empty()) return;
  const std::string where = "sentence at line " + std::to_string(first_line);
  const bool untagged = tags.front() == kUntagged;
  for (const auto& t : tags) {
    if ((t == kUntagged) != untagged)
      throw DataError(where + ": mixes tagged and untagged tokens");
  }
  AnnotatedSentence sent;
  sent.tokens = std::move(tokens);
  std::vector<EntitySpan> spans;
  if (!untagged) {
    if (!bilou_valid(tags)) throw DataError(where + ": invalid BILOU tag sequence");
    sent.entity_tags = std::move(tags);
    spans = bilou_to_spans(sent.entity_tags);
  }
  for (const auto& r : rels) {
    const int n = static_cast<int>(sent.tokens.size());
    if (r.head < 0 || r.head >= n || r.tail < 0 || r.tail >= n)
      throw DataError("line " + std::to_string(r.line_no) + ": relation endpoint out of range");
    if (untagged)
      throw DataError("line " + std::to_string(r.line_no) + ": relation in an untagged sentence");
    auto last_of = [&](int i) {
      for (const auto& s : spans)
        if (s.start <= i && i <= s.end) return s.end;
      throw DataError("line " + std::to_string(r.line_no) + ": relation endpoint " +
                      std::to_string(i) + " is not inside any entity");
    };
    sent.relations.push_back({last_of(r.head), last_of(r.tail), r.label});
  }
  corpus.push_back(std::move(sent));
  tokens.clear();
  tags.clear();
  rels.clear();
}

}  // namespace

Corpus parse_corpus_text(const std::string& text) {
  Corpus corpus;
  std::vector<std::string> tokens, tags;
  std::vector<RawRelation> rels;
  int first_line = 0;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush_sentence(corpus, tokens, tags, rels, first_line);
      continue;
    }
    const auto fields = split_tabs(line);
    if (fields[0] == "R") {
      if (fields.size() != 4)
        throw DataError("line " + std::to_string(line_no) + ": relation line needs 4 fields");
      if (tokens.empty())
        throw DataError("line " + std::to_string(line_no) + ": relation line outside a sentence");
      if (fields[3].empty())
        throw DataError("line " + std::to_string(line_no) + ": empty relation label");
      rels.push_back({parse_int(fields[1], line_no, "head index"),
                      parse_int(fields[2], line_no, "tail index"), line_no, fields[3]});
      continue;
    }
    if (fields.size() != 3)
      throw DataError("line " + std::to_string(line_no) + ": token line needs 3 fields");
    if (!rels.empty())
      throw DataError("line " + std::to_string(line_no) + ": token line after relation lines");
    if (tokens.empty()) first_line = line_no;
    const int index = parse_int(fields[0], line_no, "token index");
    if (index != static_cast<int>(tokens.size()))
      throw DataError("line " + std::to_string(line_no) + ": token index " + fields[0] +
                      ", expected " + std::to_string(tokens.size()));
    if (fields[1].empty())
      throw DataError("line " + std::to_string(line_no) + ": empty word");
    if (fields[2].empty())
      throw DataError("line " + std::to_string(line_no) + ": empty tag");
    tokens.push_back(fields[1]);
    tags.push_back(fields[2]);
  }
  flush_sentence(corpus, tokens, tags, rels, first_line);
  return corpus;
}

Corpus parse_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus_text(buf.str());
}

std::string corpus_to_text(const Corpus& corpus) {
  std::ostringstream out;
  bool first = true;
  for (const auto& sent : corpus) {
    if (!first) out << "\n";
    first = false;
    for (size_t i = 0; i < sent.tokens.size(); ++i) {
      const std::string& tag = sent.entity_tags.empty() ? kUntagged : sent.entity_tags[i];
      out << i << "\t" << sent.tokens[i] << "\t" << tag << "\n";
    }
    for (const auto& r : sent.relations)
      out << "R\t" << r.head << "\t" << r.tail << "\t" << r.label << "\n";
  }
  return out.str();
}

void write_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file: " + path);
  out << corpus_to_text(corpus);
}

std::pair<char, std::string> tag_parse(const std::string& tag) {
  if (tag == "O") return {'O', ""};
  if (tag.size() >= 3 && tag[1] == '-' &&
      (tag[0] == 'B' || tag[0] == 'I' || tag[0] == 'L' || tag[0] == 'U'))
    return {tag[0], tag.substr(2)};
  throw DataError("malformed BILOU tag: '" + tag + "'");
}

std::vector<std::string> spans_to_bilou(const std::vector<EntitySpan>& spans, int len) {
  std::vector<EntitySpan> sorted(spans);
  std::sort(sorted.begin(), sorted.end(),
            [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
  std::vector<std::string> tags(len, "O");
  int prev_end = -1;
  for (const auto& s : sorted) {
    if (s.start > s.end || s.start < 0 || s.end >= len)
      throw DataError("span (" + std::to_string(s.start) + "," + std::to_string(s.end) +
                      ") out of range for length " + std::to_string(len));
    if (s.start <= prev_end)
      throw DataError("overlapping spans at token " + std::to_string(s.start));
    prev_end = s.end;
    if (s.start == s.end) {
      tags[s.start] = "U-" + s.label;
    } else {
      tags[s.start] = "B-" + s.label;
      for (int i = s.start + 1; i < s.end; ++i) tags[i] = "I-" + s.label;
      tags[s.end] = "L-" + s.label;
    }
  }
  return tags;
}

std::vector<EntitySpan> bilou_to_spans(const std::vector<std::string>& tags) {
  std::vector<EntitySpan> spans;
  int open_start = -1;
  std::string open_type;
  auto close_at = [&](int end) {
    if (open_start >= 0) spans.push_back({open_start, end, open_type});
    open_start = -1;
  };
  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    const auto [boundary, type] = tag_parse(tags[i]);
    switch (boundary) {
      case 'O':
        close_at(i - 1);
        break;
      case 'U':
        close_at(i - 1);
        spans.push_back({i, i, type});
        break;
      case 'B':
        close_at(i - 1);
        open_start = i;
        open_type = type;
        break;
      case 'I':
        if (open_start < 0 || open_type != type) {
          close_at(i - 1);
          open_start = i;
          open_type = type;
        }
        break;
      case 'L':
        if (open_start >= 0 && open_type == type) {
          close_at(i);
        } else {
          close_at(i - 1);
          spans.push_back({i, i, type});
        }
        break;
    }
  }
  close_at(static_cast<int>(tags.size()) - 1);
  return spans;
}

bool bilou_valid(const std::vector<std::string>& tags) {
  std::string open_type;
  bool open = false;
  for (const auto& tag : tags) {
    char boundary;
    std::string type;
    try {
      std::tie(boundary, type) = tag_parse(tag);
    } catch (const DataError&) {
      return false;
    }
    if (open) {
      if ((boundary != 'I' && boundary != 'L') || type != open_type) return false;
      if (boundary == 'L') open = false;
    } else {
      if (boundary == 'I' || boundary == 'L') return false;
      if (boundary == 'B') {
        open = true;
        open_type = type;
      }
    }
  }
  return !open;
}

int SymbolTable::add(const std::string& symbol) {
  auto it = ids_.find(symbol);
  if (it != ids_.end()) return it->second;
  const int id = size();
  symbols_.push_back(symbol);
  ids_.emplace(symbol, id);
  return id;
}

int SymbolTable::id(const std::string& symbol) const {
  auto it = ids_.find(symbol);
  return it == ids_.end() ? -1 : it->second;
}

const std::string& SymbolTable::symbol(int id) const {
  if (id < 0 || id >= size()) throw Error("symbol id " + std::to_string(id) + " out of range");
  return symbols_[id];
}

Vocabularies Vocabularies::build(const Corpus& train) {
  Vocabularies v;
  v.words.add(kUnk);
  v.chars.add(kUnk);
  v.tags.add("O");
  for (const char* b : {"B", "I", "O", "L", "U"}) v.boundaries.add(b);
  v.relations.add(kNeg);
  for (size_t si = 0; si < train.size(); ++si) {
    const auto& sent = train[si];
    if (sent.entity_tags.size() != sent.tokens.size())
      throw DataError("training sentence " + std::to_string(si + 1) + " is not fully tagged");
    for (const auto& word : sent.tokens) {
      v.words.add(word);
      v.word_counts[word] += 1;
      for (const auto& ch : utf8_codepoints(word)) v.chars.add(ch);
    }
    for (const auto& tag : sent.entity_tags) {
      const auto [boundary, type] = tag_parse(tag);
      if (boundary == 'O') continue;
      if (std::find(v.entity_classes.begin(), v.entity_classes.end(), type) ==
          v.entity_classes.end()) {
        v.entity_classes.push_back(type);
        for (const char* b : {"B-", "I-", "L-", "U-"}) v.tags.add(b + type);
      }
    }
    for (const auto& r : sent.relations) v.relations.add(r.label);
  }
  return v;
}

int Vocabularies::boundary_id_of_tag(const std::string& tag) const {
  const auto [boundary, type] = tag_parse(tag);
  (void)type;
  return boundaries.id(std::string(1, boundary));
}

bool Vocabularies::operator==(const Vocabularies& other) const {
  return words == other.words && chars == other.chars && tags == other.tags &&
         boundaries == other.boundaries && relations == other.relations &&
         word_counts == other.word_counts && entity_classes == other.entity_classes;
}

std::vector<std::string> utf8_codepoints(const std::string& word) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < word.size()) {
    const unsigned char lead = word[i];
    size_t len = 1;
    if ((lead & 0xE0) == 0xC0) len = 2;
    else if ((lead & 0xF0) == 0xE0) len = 3;
    else if ((lead & 0xF8) == 0xF0) len = 4;
    if (i + len > word.size()) len = 1;
    for (size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(word[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.push_back(word.substr(i, len));
    i += len;
  }
  return out;
}

double unk_probability(long long count) {
  return 0.25 / (0.25 + static_cast<double>(count));
}

std::string word_dropout_replace(const std::string& word,
                                 const std::unordered_map<std::string, long long>& counts,
                                 RngStream& rng, bool training) {
  const auto it = counts.find(word);
  if (!training) return it == counts.end() ? kUnk : word;
  const long long count = it == counts.end() ? 0 : it->second;
  return rng.uniform() < unk_probability(count) ? kUnk : word;
}

int load_pretrained_words(const std::string& path, const SymbolTable& words, Tensor word_emb) {
  if (word_emb.shape().size() != 2 || word_emb.shape()[0] != words.size())
    throw DataError("word embedding matrix does not match the word vocabulary");
  const int dim = word_emb.shape()[1];
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open pretrained vector file: " + path);
  std::string line;
  int line_no = 0;
  std::vector<bool> written(words.size(), false);
  int rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    std::vector<double> vec;
    double v;
    while (fields >> v) vec.push_back(v);
    if (static_cast<int>(vec.size()) != dim)
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                      " vector values, got " + std::to_string(vec.size()));
    const int id = words.id(word);
    if (id < 0) continue;
    std::copy(vec.begin(), vec.end(), word_emb.values().begin() + static_cast<size_t>(id) * dim);
    if (!written[id]) {
      written[id] = true;
      ++rows;
    }
  }
  return rows;
}

}  // namespace relex
