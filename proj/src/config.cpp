#include "relex/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "relex/errors.hpp"

namespace relex {

namespace {

std::string double_text(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

std::string bool_text(bool v) { return v ? "true" : "false"; }

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

int parse_int(const std::string& s, const std::string& key) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(key + ": expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + s + "'");
  return v;
}

double parse_double(const std::string& s, const std::string& key) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  return v;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

void RunConfig::validate() const {
  if (setup != 1 && setup != 2) throw ConfigError("setup must be 1 or 2");
  if (no_bilinear && no_linear)
    throw ConfigError("no_bilinear and no_linear together leave no relation scorer");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  for (int d : {word_dim, char_dim, label_dim, boundary_dim, ffnn_dim, hidden_dim})
    if (d < 1) throw ConfigError("embedding and layer sizes must be at least 1");
  if (lstm_layers < 1) throw ConfigError("lstm_layers must be at least 1");
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) throw ConfigError("keep_prob must be in (0, 1]");
}

std::string mode_name(Mode mode) { return mode == Mode::Joint ? "joint" : "pipeline"; }

std::string config_to_text(const RunConfig& c) {
  std::ostringstream out;
  out << "setup = " << c.setup << "\n";
  out << "mode = " << mode_name(c.mode) << "\n";
  out << "no_char = " << bool_text(c.no_char) << "\n";
  out << "no_crf = " << bool_text(c.no_crf) << "\n";
  out << "no_entity_emb = " << bool_text(c.no_entity_emb) << "\n";
  out << "no_bilinear = " << bool_text(c.no_bilinear) << "\n";
  out << "no_linear = " << bool_text(c.no_linear) << "\n";
  out << "epochs = " << c.epochs << "\n";
  out << "learning_rate = " << double_text(c.learning_rate) << "\n";
  out << "word_dim = " << c.word_dim << "\n";
  out << "char_dim = " << c.char_dim << "\n";
  out << "label_dim = " << c.label_dim << "\n";
  out << "boundary_dim = " << c.boundary_dim << "\n";
  out << "ffnn_dim = " << c.ffnn_dim << "\n";
  out << "hidden_dim = " << c.hidden_dim << "\n";
  out << "lstm_layers = " << c.lstm_layers << "\n";
  out << "keep_prob = " << double_text(c.keep_prob) << "\n";
  out << "seed = " << c.seed << "\n";
  out << "rc_label_source = " << (c.rc_label_source == RcLabelSource::Gold ? "gold" : "predicted")
      << "\n";
  out << "rc_loss_reduction = " << (c.rc_loss_reduction == RcLossReduction::Sum ? "sum" : "mean")
      << "\n";
  out << "strict_crf_transitions = " << bool_text(c.strict_crf_transitions) << "\n";
  out << "word_dropout_chars = " << bool_text(c.word_dropout_chars) << "\n";
  return out.str();
}

RunConfig config_from_text(const std::string& text) {
  RunConfig c;
  const std::map<std::string, std::function<void(const std::string&, const std::string&)>>
      setters = {
          {"setup", [&](const std::string& k, const std::string& v) { c.setup = parse_int(v, k); }},
          {"mode",
           [&](const std::string& k, const std::string& v) {
             if (v == "joint") c.mode = Mode::Joint;
             else if (v == "pipeline") c.mode = Mode::Pipeline;
             else throw ConfigError(k + ": expected joint or pipeline, got '" + v + "'");
           }},
          {"no_char", [&](const std::string& k, const std::string& v) { c.no_char = parse_bool(v, k); }},
          {"no_crf", [&](const std::string& k, const std::string& v) { c.no_crf = parse_bool(v, k); }},
          {"no_entity_emb",
           [&](const std::string& k, const std::string& v) { c.no_entity_emb = parse_bool(v, k); }},
          {"no_bilinear",
           [&](const std::string& k, const std::string& v) { c.no_bilinear = parse_bool(v, k); }},
          {"no_linear",
           [&](const std::string& k, const std::string& v) { c.no_linear = parse_bool(v, k); }},
          {"epochs", [&](const std::string& k, const std::string& v) { c.epochs = parse_int(v, k); }},
          {"learning_rate",
           [&](const std::string& k, const std::string& v) { c.learning_rate = parse_double(v, k); }},
          {"word_dim", [&](const std::string& k, const std::string& v) { c.word_dim = parse_int(v, k); }},
          {"char_dim", [&](const std::string& k, const std::string& v) { c.char_dim = parse_int(v, k); }},
          {"label_dim", [&](const std::string& k, const std::string& v) { c.label_dim = parse_int(v, k); }},
          {"boundary_dim",
           [&](const std::string& k, const std::string& v) { c.boundary_dim = parse_int(v, k); }},
          {"ffnn_dim", [&](const std::string& k, const std::string& v) { c.ffnn_dim = parse_int(v, k); }},
          {"hidden_dim",
           [&](const std::string& k, const std::string& v) { c.hidden_dim = parse_int(v, k); }},
          {"lstm_layers",
           [&](const std::string& k, const std::string& v) { c.lstm_layers = parse_int(v, k); }},
          {"keep_prob",
           [&](const std::string& k, const std::string& v) { c.keep_prob = parse_double(v, k); }},
          {"seed", [&](const std::string& k, const std::string& v) { c.seed = parse_u64(v, k); }},
          {"rc_label_source",
           [&](const std::string& k, const std::string& v) {
             if (v == "predicted") c.rc_label_source = RcLabelSource::Predicted;
             else if (v == "gold") c.rc_label_source = RcLabelSource::Gold;
             else throw ConfigError(k + ": expected predicted or gold, got '" + v + "'");
           }},
          {"rc_loss_reduction",
           [&](const std::string& k, const std::string& v) {
             if (v == "mean") c.rc_loss_reduction = RcLossReduction::Mean;
             else if (v == "sum") c.rc_loss_reduction = RcLossReduction::Sum;
             else throw ConfigError(k + ": expected mean or sum, got '" + v + "'");
           }},
          {"strict_crf_transitions",
           [&](const std::string& k, const std::string& v) {
             c.strict_crf_transitions = parse_bool(v, k);
           }},
          {"word_dropout_chars",
           [&](const std::string& k, const std::string& v) {
             c.word_dropout_chars = parse_bool(v, k);
           }},
      };

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    it->second(key, value);
  }
  return c;
}

}  // namespace relex
