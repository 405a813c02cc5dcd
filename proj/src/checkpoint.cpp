#include "relex/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "relex/errors.hpp"

namespace relex {

namespace {

constexpr const char* kHeader = "relex checkpoint 1";

std::string hexfloat(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

// Line-cursor over the archive text.
struct Reader {
  std::istringstream in;
  int line_no = 0;
  explicit Reader(const std::string& text) : in(text) {}

  std::string next(const char* what) {
    std::string line;
    if (!std::getline(in, line))
      throw DataError("checkpoint truncated: expected " + std::string(what));
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  // "name <count>" section headers.
  int section(const std::string& name) {
    const std::string line = next(name.c_str());
    std::istringstream fields(line);
    std::string got;
    int count = -1;
    fields >> got >> count;
    if (got != name || count < 0)
      throw DataError("checkpoint line " + std::to_string(line_no) + ": expected '" + name +
                      " <count>', got '" + line + "'");
    return count;
  }
};

void write_symbols(std::ostringstream& out, const std::string& name, const SymbolTable& table) {
  out << name << " " << table.size() << "\n";
  for (const auto& s : table.symbols()) out << s << "\n";
}

void read_symbols(Reader& r, const std::string& name, SymbolTable& table) {
  const int count = r.section(name);
  for (int i = 0; i < count; ++i) table.add(r.next(name.c_str()));
  if (table.size() != count)
    throw DataError("checkpoint " + name + " section contains duplicates");
}

}  // namespace

std::string checkpoint_to_text(const Model& model) {
  std::ostringstream out;
  out << kHeader << "\n";

  const std::string config_text = config_to_text(model.config());
  int config_lines = 0;
  for (char ch : config_text)
    if (ch == '\n') ++config_lines;
  out << "config " << config_lines << "\n" << config_text;

  const Vocabularies& v = model.vocab();
  out << "words " << v.words.size() << "\n";
  for (const auto& w : v.words.symbols()) {
    const auto it = v.word_counts.find(w);
    out << (it == v.word_counts.end() ? 0 : it->second) << "\t" << w << "\n";
  }
  write_symbols(out, "chars", v.chars);
  write_symbols(out, "tags", v.tags);
  write_symbols(out, "boundaries", v.boundaries);
  write_symbols(out, "relations", v.relations);
  out << "entity_classes " << v.entity_classes.size() << "\n";
  for (const auto& c : v.entity_classes) out << c << "\n";

  const auto& params = model.params();
  out << "params " << params.names().size() << "\n";
  for (const auto& name : params.names()) {
    const Tensor t = params.get(name);
    out << name << " ";
    const auto& shape = t.shape();
    for (size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
    out << "\n";
    const auto& values = t.values();
    for (size_t i = 0; i < values.size(); ++i) out << (i ? " " : "") << hexfloat(values[i]);
    out << "\n";
  }
  out << "end\n";
  return out.str();
}

Model checkpoint_from_text(const std::string& text) {
  Reader r(text);
  if (r.next("header") != kHeader) throw DataError("not a checkpoint file");

  const int config_lines = r.section("config");
  std::string config_text;
  for (int i = 0; i < config_lines; ++i) config_text += r.next("config line") + "\n";
  const RunConfig config = config_from_text(config_text);

  Vocabularies vocab;
  const int word_count = r.section("words");
  for (int i = 0; i < word_count; ++i) {
    const std::string line = r.next("word entry");
    const size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("checkpoint line " + std::to_string(r.line_no) + ": bad word entry");
    long long count = 0;
    try {
      count = std::stoll(line.substr(0, tab));
    } catch (const std::exception&) {
      throw DataError("checkpoint line " + std::to_string(r.line_no) + ": bad word count");
    }
    const std::string word = line.substr(tab + 1);
    vocab.words.add(word);
    if (count > 0) vocab.word_counts[word] = count;
  }
  if (vocab.words.size() != word_count)
    throw DataError("checkpoint words section contains duplicates");
  read_symbols(r, "chars", vocab.chars);
  read_symbols(r, "tags", vocab.tags);
  read_symbols(r, "boundaries", vocab.boundaries);
  read_symbols(r, "relations", vocab.relations);
  const int class_count = r.section("entity_classes");
  for (int i = 0; i < class_count; ++i) vocab.entity_classes.push_back(r.next("entity class"));

  RngSet rng(config.seed);
  Model model(config, vocab, rng.init);

  const auto expected = expected_parameter_shapes(config, vocab);
  const int param_count = r.section("params");
  if (param_count != static_cast<int>(expected.size()))
    throw DataError("checkpoint holds " + std::to_string(param_count) + " parameters, expected " +
                    std::to_string(expected.size()));
  for (const auto& [name, shape] : expected) {
    const std::string head = r.next("parameter header");
    const size_t space = head.find(' ');
    const std::string got_name = head.substr(0, space == std::string::npos ? head.size() : space);
    if (got_name != name)
      throw DataError("checkpoint parameter mismatch: expected '" + name + "', found '" +
                      got_name + "'");
    Shape got_shape;
    if (space != std::string::npos) {
      std::istringstream dims(head.substr(space + 1));
      std::string d;
      while (std::getline(dims, d, ',')) {
        try {
          got_shape.push_back(std::stoi(d));
        } catch (const std::exception&) {
          throw DataError("checkpoint parameter '" + name + "': bad shape");
        }
      }
    }
    if (got_shape != shape)
      throw DataError("checkpoint parameter '" + name + "': shape " + shape_str(got_shape) +
                      ", expected " + shape_str(shape));

    const std::string line = r.next("parameter values");
    auto& values = model.params().get(name).values();
    const char* p = line.c_str();
    for (size_t i = 0; i < values.size(); ++i) {
      char* end = nullptr;
      const double parsed = std::strtod(p, &end);
      if (end == p)
        throw DataError("checkpoint parameter '" + name + "': expected " +
                        std::to_string(values.size()) + " values, found " + std::to_string(i));
      values[i] = parsed;
      p = end;
    }
    while (*p == ' ') ++p;
    if (*p != '\0') throw DataError("checkpoint parameter '" + name + "': trailing values");
  }
  if (r.next("trailer") != "end") throw DataError("checkpoint missing end marker");
  return model;
}

void save_checkpoint(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint file: " + path);
  out << checkpoint_to_text(model);
  if (!out) throw DataError("failed writing checkpoint file: " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_text(buf.str());
}

}  // namespace relex
