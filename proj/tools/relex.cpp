#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relex/checkpoint.hpp"
#include "relex/config.hpp"
#include "relex/data.hpp"
#include "relex/errors.hpp"
#include "relex/eval.hpp"
#include "relex/model.hpp"
#include "relex/train.hpp"

namespace {

using namespace relex;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw DataError("failed writing " + path);
}

// Relative input paths that do not exist locally are retried under
// $RELEX_DATA_DIR. Output paths are never redirected.
std::string resolve_input(const std::string& path) {
  namespace fs = std::filesystem;
  if (path.empty()) return path;
  std::error_code ec;
  if (fs::path(path).is_absolute() || fs::exists(path, ec)) return path;
  if (const char* dir = std::getenv("RELEX_DATA_DIR"); dir && *dir) {
    fs::path joined = fs::path(dir) / path;
    if (fs::exists(joined, ec)) return joined.string();
  }
  return path;
}

// Config assembly: defaults, then the --config file, then explicit flags.
struct ConfigFlags {
  std::string config_path;
  RunConfig flag;
  std::string mode_str = "joint";
  std::string rc_labels = "predicted";
  std::string rc_loss = "mean";

  CLI::Option* setup = nullptr;
  CLI::Option* mode = nullptr;
  CLI::Option* no_char = nullptr;
  CLI::Option* no_crf = nullptr;
  CLI::Option* no_entity_emb = nullptr;
  CLI::Option* no_bilinear = nullptr;
  CLI::Option* no_linear = nullptr;
  CLI::Option* epochs = nullptr;
  CLI::Option* learning_rate = nullptr;
  CLI::Option* word_dim = nullptr;
  CLI::Option* char_dim = nullptr;
  CLI::Option* label_dim = nullptr;
  CLI::Option* boundary_dim = nullptr;
  CLI::Option* ffnn_dim = nullptr;
  CLI::Option* hidden_dim = nullptr;
  CLI::Option* lstm_layers = nullptr;
  CLI::Option* keep_prob = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* rc_labels_opt = nullptr;
  CLI::Option* rc_loss_opt = nullptr;
  CLI::Option* strict_crf = nullptr;
  CLI::Option* word_dropout_chars = nullptr;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "config file; explicit flags override its values");
    setup = cmd.add_option("--setup", flag.setup, "1: plain input, 2: gold boundary embeddings")
                ->check(CLI::IsMember({1, 2}));
    mode = cmd.add_option("--mode", mode_str, "joint or pipeline")
               ->check(CLI::IsMember({"joint", "pipeline"}));
    no_char = cmd.add_flag("--no-char", flag.no_char, "drop the char-level word embedding");
    no_crf = cmd.add_flag("--no-crf", flag.no_crf, "per-token softmax instead of the CRF");
    no_entity_emb =
        cmd.add_flag("--no-entity-emb", flag.no_entity_emb, "drop tag embeddings from the RC input");
    no_bilinear =
        cmd.add_flag("--no-bilinear", flag.no_bilinear, "drop the bilinear term of the scorer");
    no_linear = cmd.add_flag("--no-linear", flag.no_linear, "drop the linear term of the scorer");
    epochs = cmd.add_option("--epochs", flag.epochs, "training epochs per phase");
    learning_rate = cmd.add_option("--learning-rate", flag.learning_rate, "Adam learning rate");
    word_dim = cmd.add_option("--word-dim", flag.word_dim, "word embedding width");
    char_dim = cmd.add_option("--char-dim", flag.char_dim, "char embedding width");
    label_dim = cmd.add_option("--label-dim", flag.label_dim, "entity tag embedding width");
    boundary_dim =
        cmd.add_option("--boundary-dim", flag.boundary_dim, "boundary letter embedding width (setup 2)");
    ffnn_dim = cmd.add_option("--ffnn-dim", flag.ffnn_dim, "head/tail projection width");
    hidden_dim = cmd.add_option("--hidden-dim", flag.hidden_dim, "LSTM hidden width per direction");
    lstm_layers = cmd.add_option("--lstm-layers", flag.lstm_layers, "stacked BiLSTM layers");
    keep_prob = cmd.add_option("--keep-prob", flag.keep_prob, "dropout keep probability");
    seed = cmd.add_option("--seed", flag.seed, "master seed for all random streams");
    rc_labels_opt = cmd.add_option("--rc-labels", rc_labels,
                                   "tag source for relation candidates during joint training")
                        ->check(CLI::IsMember({"predicted", "gold"}));
    rc_loss_opt = cmd.add_option("--rc-loss", rc_loss, "relation loss reduction per sentence")
                      ->check(CLI::IsMember({"mean", "sum"}));
    strict_crf = cmd.add_flag("--strict-crf-transitions", flag.strict_crf_transitions,
                              "forbid BILOU-invalid CRF transitions");
    word_dropout_chars = cmd.add_flag("--word-dropout-chars", flag.word_dropout_chars,
                                      "word dropout also hides the char sequence");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) cfg = config_from_text(read_text_file(resolve_input(config_path)));
    if (setup->count()) cfg.setup = flag.setup;
    if (mode->count()) cfg.mode = mode_str == "pipeline" ? Mode::Pipeline : Mode::Joint;
    if (no_char->count()) cfg.no_char = flag.no_char;
    if (no_crf->count()) cfg.no_crf = flag.no_crf;
    if (no_entity_emb->count()) cfg.no_entity_emb = flag.no_entity_emb;
    if (no_bilinear->count()) cfg.no_bilinear = flag.no_bilinear;
    if (no_linear->count()) cfg.no_linear = flag.no_linear;
    if (epochs->count()) cfg.epochs = flag.epochs;
    if (learning_rate->count()) cfg.learning_rate = flag.learning_rate;
    if (word_dim->count()) cfg.word_dim = flag.word_dim;
    if (char_dim->count()) cfg.char_dim = flag.char_dim;
    if (label_dim->count()) cfg.label_dim = flag.label_dim;
    if (boundary_dim->count()) cfg.boundary_dim = flag.boundary_dim;
    if (ffnn_dim->count()) cfg.ffnn_dim = flag.ffnn_dim;
    if (hidden_dim->count()) cfg.hidden_dim = flag.hidden_dim;
    if (lstm_layers->count()) cfg.lstm_layers = flag.lstm_layers;
    if (keep_prob->count()) cfg.keep_prob = flag.keep_prob;
    if (seed->count()) cfg.seed = flag.seed;
    if (rc_labels_opt->count())
      cfg.rc_label_source = rc_labels == "gold" ? RcLabelSource::Gold : RcLabelSource::Predicted;
    if (rc_loss_opt->count())
      cfg.rc_loss_reduction = rc_loss == "sum" ? RcLossReduction::Sum : RcLossReduction::Mean;
    if (strict_crf->count()) cfg.strict_crf_transitions = flag.strict_crf_transitions;
    if (word_dropout_chars->count()) cfg.word_dropout_chars = flag.word_dropout_chars;
    cfg.validate();
    return cfg;
  }
};

struct TrainArgs {
  ConfigFlags config;
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string out_path;
  std::string report_path;
  std::string config_out;
  std::string pretrained;
};

int run_train(const TrainArgs& a) {
  RunConfig cfg = a.config.resolve();
  Corpus train = parse_corpus(resolve_input(a.train_path));
  Corpus dev = parse_corpus(resolve_input(a.dev_path));
  TrainOptions options;
  if (!a.pretrained.empty()) options.pretrained_path = resolve_input(a.pretrained);

  TrainReport report = train_model(train, dev, cfg, options);

  write_text_file(a.out_path, report.best_checkpoint);
  std::string report_path = a.report_path.empty() ? a.out_path + ".report" : a.report_path;
  write_text_file(report_path, train_report_to_text(report));
  std::string config_path = a.config_out.empty() ? a.out_path + ".config" : a.config_out;
  write_text_file(config_path, config_to_text(cfg));

  std::printf("final dev: entity %.2f relation %.2f average %.2f\n", report.best_dev_entity_f1,
              report.best_dev_relation_f1, report.best_dev_average);
  std::printf("wrote %s\n", a.out_path.c_str());
  std::printf("wrote %s\n", report_path.c_str());
  std::printf("wrote %s\n", config_path.c_str());

  if (!a.test_path.empty()) {
    Corpus test = parse_corpus(resolve_input(a.test_path));
    Model model = checkpoint_from_text(report.best_checkpoint);
    ScoreReport scores = evaluate_model(model, test);
    std::fputs(report_to_table(scores).c_str(), stdout);
  }
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string data_path;
  std::string format = "table";
};

int run_eval(const EvalArgs& a) {
  Model model = load_checkpoint(resolve_input(a.checkpoint));
  Corpus gold = parse_corpus(resolve_input(a.data_path));
  ScoreReport scores = evaluate_model(model, gold);
  if (a.format != "kv") std::fputs(report_to_table(scores).c_str(), stdout);
  if (a.format != "table") std::fputs(report_to_kv(scores).c_str(), stdout);
  return 0;
}

struct PredictArgs {
  std::string checkpoint;
  std::string data_path;
  std::string out_path = "-";
};

int run_predict(const PredictArgs& a) {
  Model model = load_checkpoint(resolve_input(a.checkpoint));
  Corpus input = parse_corpus(resolve_input(a.data_path));
  Corpus output;
  output.reserve(input.size());
  for (const AnnotatedSentence& sent : input) {
    Prediction pred = model.predict(sent);
    output.push_back({sent.tokens, pred.tags, pred.relations});
  }
  std::string text = corpus_to_text(output);
  if (a.out_path == "-") {
    std::fputs(text.c_str(), stdout);
  } else {
    write_text_file(a.out_path, text);
    std::printf("wrote %s\n", a.out_path.c_str());
  }
  return 0;
}

struct SeedsArgs {
  ConfigFlags config;
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string pretrained;
  std::string scores_path;
  int runs = 10;
};

std::pair<double, double> mean_stddev(const std::vector<double>& xs) {
  double n = static_cast<double>(xs.size());
  double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

int run_seeds(const SeedsArgs& a) {
  RunConfig base = a.config.resolve();
  Corpus train = parse_corpus(resolve_input(a.train_path));
  Corpus dev = parse_corpus(resolve_input(a.dev_path));
  Corpus held_out = a.test_path.empty() ? dev : parse_corpus(resolve_input(a.test_path));
  TrainOptions options;
  if (!a.pretrained.empty()) options.pretrained_path = resolve_input(a.pretrained);

  std::array<std::vector<double>, 3> collected;  // entity, relation, average
  std::ostringstream dump;
  int failures = 0;
  int failure_code = 0;

  auto emit = [&](const std::string& line) {
    std::fputs(line.c_str(), stdout);
    dump << line;
  };

  for (int i = 0; i < a.runs; ++i) {
    RunConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(i);
    auto fail = [&](int code, const std::exception& e) {
      ++failures;
      if (failure_code == 0) failure_code = code;
      char buf[512];
      std::snprintf(buf, sizeof(buf), "seed %llu failed: %s\n",
                    static_cast<unsigned long long>(cfg.seed), e.what());
      emit(buf);
    };
    try {
      TrainReport report = train_model(train, dev, cfg, options);
      Model model = checkpoint_from_text(report.best_checkpoint);
      ScoreReport s = evaluate_model(model, held_out);
      collected[0].push_back(s.entity.macro_f1);
      collected[1].push_back(s.relation.macro_f1);
      collected[2].push_back(s.average());
      char buf[256];
      std::snprintf(buf, sizeof(buf), "seed %llu: entity %.2f relation %.2f average %.2f\n",
                    static_cast<unsigned long long>(cfg.seed), s.entity.macro_f1,
                    s.relation.macro_f1, s.average());
      emit(buf);
    } catch (const ConfigError& e) {
      fail(1, e);
    } catch (const DivergenceError& e) {
      fail(3, e);
    } catch (const std::exception& e) {
      fail(2, e);
    }
  }

  if (!collected[0].empty()) {
    const char* names[3] = {"entity", "relation", "average"};
    for (int k = 0; k < 3; ++k) {
      auto [mean, stddev] = mean_stddev(collected[k]);
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%s %.1f (%.1f)\n", names[k], mean, stddev);
      emit(buf);
    }
  }
  if (failures > 0) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "partial results: %d of %d seeds failed\n", failures, a.runs);
    emit(buf);
  }
  if (!a.scores_path.empty()) write_text_file(a.scores_path, dump.str());
  return failures > 0 ? failure_code : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint named-entity recognition and relation extraction"};
  app.require_subcommand(1);
  app.footer("Relative input paths that do not exist locally are retried under $RELEX_DATA_DIR.\n"
             "Exit codes: 0 success, 1 usage, 2 data error, 3 numerical divergence.");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model and save the best checkpoint");
  train_cmd->add_option("--train", train_args.train_path, "training corpus")->required();
  train_cmd->add_option("--dev", train_args.dev_path, "development corpus for model selection")
      ->required();
  train_cmd->add_option("--test", train_args.test_path, "held-out corpus scored after training");
  train_cmd->add_option("--out", train_args.out_path, "checkpoint output path")->required();
  train_cmd->add_option("--report", train_args.report_path,
                        "training report path (default: <out>.report)");
  train_cmd->add_option("--save-config", train_args.config_out,
                        "resolved config output path (default: <out>.config)");
  train_cmd->add_option("--pretrained", train_args.pretrained, "pretrained word vector file");
  train_args.config.attach(*train_cmd);

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score a checkpoint against a gold corpus");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "trained checkpoint")->required();
  eval_cmd->add_option("--data", eval_args.data_path, "gold corpus")->required();
  eval_cmd->add_option("--format", eval_args.format, "table, kv, or both")
      ->check(CLI::IsMember({"table", "kv", "both"}));

  PredictArgs predict_args;
  CLI::App* predict_cmd = app.add_subcommand("predict", "annotate a corpus with a checkpoint");
  predict_cmd->add_option("--checkpoint", predict_args.checkpoint, "trained checkpoint")->required();
  predict_cmd->add_option("--data", predict_args.data_path, "input corpus (tags may be '-')")
      ->required();
  predict_cmd->add_option("--out", predict_args.out_path, "output path, '-' for stdout");

  SeedsArgs seeds_args;
  CLI::App* seeds_cmd =
      app.add_subcommand("seeds", "train across consecutive seeds and aggregate scores");
  seeds_cmd->add_option("--train", seeds_args.train_path, "training corpus")->required();
  seeds_cmd->add_option("--dev", seeds_args.dev_path, "development corpus")->required();
  seeds_cmd->add_option("--test", seeds_args.test_path,
                        "held-out corpus for the aggregate (default: the dev corpus)");
  seeds_cmd->add_option("--runs", seeds_args.runs, "number of consecutive seeds")
      ->check(CLI::Range(2, 1000000));
  seeds_cmd->add_option("--scores", seeds_args.scores_path, "write per-seed scores to this file");
  seeds_cmd->add_option("--pretrained", seeds_args.pretrained, "pretrained word vector file");
  seeds_args.config.attach(*seeds_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto guarded = [](auto&& fn) -> int {
    try {
      return fn();
    } catch (const ConfigError& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    } catch (const DivergenceError& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 3;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
    }
  };

  if (train_cmd->parsed()) return guarded([&] { return run_train(train_args); });
  if (eval_cmd->parsed()) return guarded([&] { return run_eval(eval_args); });
  if (predict_cmd->parsed()) return guarded([&] { return run_predict(predict_args); });
  if (seeds_cmd->parsed()) return guarded([&] { return run_seeds(seeds_args); });
  return 1;
}
