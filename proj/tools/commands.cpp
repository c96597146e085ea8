#include "commands.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "csrnn/baseline.hpp"
#include "csrnn/corpus.hpp"
#include "csrnn/embeddings.hpp"
#include "csrnn/error.hpp"
#include "csrnn/eval.hpp"
#include "csrnn/gradcheck.hpp"
#include "csrnn/model.hpp"
#include "csrnn/text.hpp"

namespace fs = std::filesystem;

namespace csrnn::cli {

namespace {

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw IoError(std::string("no ") + what + " file given");
  if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " file '" + path + "' does not exist");
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

// "cs6", "langid", or a comma-separated label list.
LabelScheme resolve_scheme(const std::string& spec) {
  if (spec.find(',') == std::string::npos) return LabelScheme::by_name(spec);
  std::vector<std::string> labels;
  for (auto l : split(spec, ',')) labels.emplace_back(trim(l));
  return LabelScheme(std::move(labels));
}

void write_resolved_config(const CLI::App& cmd, const fs::path& dir) {
  auto out = open_out(dir / "config.ini");
  out << cmd.config_to_str(true, false);
}

// The config file only names options already known to the subcommand; it
// is spliced in right after the subcommand so later flags override it.
void add_config_option(CLI::App* cmd) {
  cmd->add_option("--config", "key = value configuration file");
}

std::vector<std::string> expand_config(const std::vector<std::string>& args, const std::set<std::string>& commands) {
  std::size_t sub = 0;
  while (sub < args.size() && !commands.contains(args[sub])) ++sub;
  if (sub == args.size()) return args;
  std::string file;
  for (std::size_t i = sub + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    else if (args[i].starts_with("--config=")) file = args[i].substr(9);
  }
  if (file.empty()) return args;
  require_file(file, "config file");
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(file);
  } catch (const CLI::Error& e) {
    throw ParseError(0, file + ": " + e.what());
  }
  std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub) + 1);
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--" || item.name == "config") continue;
    if (!item.parents.empty() && item.parents.back() != args[sub]) continue;
    if (std::all_of(item.inputs.begin(), item.inputs.end(), [](const std::string& v) { return v.empty(); })) continue;
    if (item.inputs.size() == 1) {
      out.push_back("--" + item.name + "=" + item.inputs[0]);
    } else {
      out.push_back("--" + item.name);
      out.insert(out.end(), item.inputs.begin(), item.inputs.end());
    }
  }
  out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub) + 1, args.end());
  return out;
}

// ---- train ----

struct TrainArgs {
  std::string train, val, test, out = "out", pretrained, scheme = "cs6", arch = "elman";
  std::vector<double> split{0.8, 0.1, 0.1};
  RnnConfig cfg;
};

void add_model_flags(CLI::App* c, TrainArgs& a) {
  c->add_option("--arch", a.arch, "elman or jordan")->check(CLI::IsMember({"elman", "jordan"}));
  c->add_flag("--use-ngrams,--use_ngrams", a.cfg.use_ngrams, "append the 12 character n-gram slots");
  c->add_option("--dim-emb,--dim_emb", a.cfg.dim_emb, "embedding dimension");
  c->add_option("--hidden", a.cfg.hidden, "hidden units");
  c->add_option("--bptt-depth,--bptt_depth", a.cfg.bptt_depth, "truncated BPTT depth");
  c->add_option("--learning-rate,--learning_rate", a.cfg.learning_rate);
  c->add_option("--lr-decay,--lr_decay", a.cfg.lr_decay);
  c->add_option("--max-epochs,--max_epochs", a.cfg.max_epochs);
  c->add_option("--patience", a.cfg.patience);
  c->add_option("--min-count,--min_count", a.cfg.min_count);
  c->add_flag("--lowercase", a.cfg.lowercase, "ASCII case folding of words and n-grams");
  c->add_option("--seed", a.cfg.seed);
}

int cmd_train(const CLI::App& cmd, TrainArgs& a, std::ostream& out) {
  require_file(a.train, "training");
  if (!a.val.empty()) require_file(a.val, "validation");
  if (!a.test.empty()) require_file(a.test, "test");
  if (!a.pretrained.empty()) require_file(a.pretrained, "pretrained embeddings");
  const LabelScheme scheme = resolve_scheme(a.scheme);
  a.cfg.arch = parse_arch(a.arch);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  Dataset train_set = read_token_file(a.train, scheme);
  Dataset val_set;
  Dataset test_set;
  if (a.val.empty()) {
    if (a.split.size() != 3) throw SplitError("--split takes three ratios");
    auto parts = split_by_author(train_set, {a.split[0], a.split[1], a.split[2]}, derive_seed(a.cfg.seed, "cli:split"));
    train_set = std::move(parts.train);
    val_set = std::move(parts.val);
    if (a.test.empty()) test_set = std::move(parts.test);
    for (auto [name, ds] : {std::pair{"train.tsv", &train_set}, {"val.tsv", &val_set}, {"test.tsv", &test_set}}) {
      if (ds->sentences.empty()) continue;
      auto f = open_out(dir / name);
      write_token_file(f, *ds);
    }
  } else {
    val_set = read_token_file(a.val, scheme);
  }
  if (!a.test.empty()) test_set = read_token_file(a.test, scheme);

  PretrainedEmbeddings pretrained;
  if (!a.pretrained.empty()) {
    pretrained = read_embeddings_text(a.pretrained);
    a.cfg.use_pretrained = true;
  }
  const TrainResult res = train(a.cfg, train_set, val_set, a.pretrained.empty() ? nullptr : &pretrained);
  save_model_file((dir / "model.csrnn").string(), res.model);
  {
    auto h = open_out(dir / "history.tsv");
    write_history_tsv(h, res.history);
  }
  write_resolved_config(cmd, dir);

  const auto& best = res.history.at(static_cast<std::size_t>(res.best_epoch - 1));
  out << "epochs = " << res.history.size() << "\nbest_epoch = " << res.best_epoch
      << "\nbest_val_accuracy = " << best.val_accuracy << '\n';
  if (!test_set.sentences.empty()) {
    const EvalReport rep = evaluate(tag(res.model, test_set), test_set);
    auto f = open_out(dir / "test_report.txt");
    write_report_text(f, rep);
    out << "test_accuracy = " << rep.accuracy << '\n';
  }
  return kOk;
}

// ---- tag ----

struct TagArgs {
  std::string model, input, out, scheme;
  bool probs = false;
};

void write_predictions(std::ostream& out, const Dataset& ds, const std::vector<Prediction>& preds,
                       const LabelScheme& scheme, bool probs) {
  char buf[32];
  for (std::size_t i = 0; i < ds.sentences.size(); ++i) {
    const auto& s = ds.sentences[i];
    if (i) out << '\n';
    if (!s.author.empty()) out << "# author=" << s.author << '\n';
    for (std::size_t t = 0; t < s.size(); ++t) {
      const auto& tok = s.tokens[t];
      out << tok.text << '\t' << (tok.label == kNoLabel ? "" : scheme.name(tok.label)) << '\t'
          << scheme.name(preds[i].labels[t]);
      if (probs) {
        for (Index l = 0; l < preds[i].probabilities.cols(); ++l) {
          std::snprintf(buf, sizeof buf, "%.6g", preds[i].probabilities(static_cast<Index>(t), l));
          out << '\t' << buf;
        }
      }
      out << '\n';
    }
  }
}

int cmd_tag(TagArgs& a, std::ostream& out) {
  require_file(a.model, "model");
  require_file(a.input, "input");
  const Model m = load_model_file(a.model);
  if (!a.scheme.empty() && !(resolve_scheme(a.scheme) == m.scheme)) {
    throw CompatibilityError("model was trained with a different label scheme than '" + a.scheme + "'");
  }
  Dataset ds;
  try {
    ds = read_token_file(a.input, m.scheme, LabelPolicy::kOptional);
  } catch (const LabelError& e) {
    throw CompatibilityError(std::string("input does not match the model's label scheme: ") + e.what());
  }
  const auto preds = tag(m, ds);
  if (a.out.empty()) {
    write_predictions(out, ds, preds, m.scheme, a.probs);
  } else {
    auto f = open_out(a.out);
    write_predictions(f, ds, preds, m.scheme, a.probs);
  }
  return kOk;
}

// ---- eval ----

struct EvalArgs {
  std::string pred, gold, out, scheme = "cs6", model;
};

std::vector<std::vector<LabelId>> read_predictions(const std::string& path, const Dataset& gold) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::vector<LabelId>> labels;
  std::vector<std::vector<std::string>> tokens;
  bool open = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      open = false;
      continue;
    }
    if (line.starts_with("# author=") && line.find('\t') == std::string::npos) continue;
    const auto f = split(line, '\t');
    if (f.size() < 3) throw ParseError(lineno, "prediction line needs token, gold and predicted columns");
    if (!open) {
      labels.emplace_back();
      tokens.emplace_back();
      open = true;
    }
    labels.back().push_back(gold.scheme.id(f[2]));
    tokens.back().emplace_back(f[0]);
  }
  for (std::size_t i = 0; i < std::min(tokens.size(), gold.sentences.size()); ++i) {
    const auto& g = gold.sentences[i].tokens;
    for (std::size_t t = 0; t < std::min(g.size(), tokens[i].size()); ++t) {
      if (g[t].text != tokens[i][t]) {
        throw AlignmentError(i, "token " + std::to_string(t) + " is '" + tokens[i][t] + "' in predictions but '" +
                                    g[t].text + "' in gold");
      }
    }
  }
  return labels;
}

int cmd_eval(EvalArgs& a, std::ostream& out) {
  require_file(a.pred, "predictions");
  require_file(a.gold, "gold");
  LabelScheme scheme;
  if (!a.model.empty()) {
    require_file(a.model, "model");
    scheme = load_model_file(a.model).scheme;
  } else {
    scheme = resolve_scheme(a.scheme);
  }
  const Dataset gold = read_token_file(a.gold, scheme);
  const auto preds = read_predictions(a.pred, gold);
  const EvalReport rep = evaluate(std::span<const std::vector<LabelId>>(preds), gold);
  write_report_text(out, rep);
  if (!a.out.empty()) {
    const fs::path dir(a.out);
    auto t = open_out(dir / "report.txt");
    write_report_text(t, rep);
    auto j = open_out(dir / "report.json");
    write_report_json(j, rep);
    auto c = open_out(dir / "confusion.tsv");
    write_confusion_tsv(c, rep);
  }
  return kOk;
}

// ---- baseline ----

struct BaselineArgs {
  std::string train, test, out = "out", scheme = "cs6", pair;
};

int cmd_baseline(BaselineArgs& a, std::ostream& out) {
  require_file(a.train, "training");
  if (!a.test.empty()) require_file(a.test, "test");
  const LabelScheme scheme = resolve_scheme(a.scheme);
  Dataset train_set = read_token_file(a.train, scheme);
  Dataset test_set;
  if (!a.test.empty()) test_set = read_token_file(a.test, scheme);
  if (!scheme.find("lang1")) {
    const auto p = split(a.pair, ',');
    if (p.size() != 2) throw SchemeError("--pair <first>,<second> is required without lang1/lang2 labels");
    train_set = to_code_switch_labels(train_set, p[0], p[1]);
    if (!a.test.empty()) test_set = to_code_switch_labels(test_set, p[0], p[1]);
  }
  const LexiconBaseline m = fit_baseline(train_set);
  const fs::path dir(a.out);
  {
    auto f = open_out(dir / "baseline.tsv");
    save_baseline(f, m);
  }
  out << "words = " << m.counts.size() << "\nmajority = " << m.scheme.name(m.majority) << '\n';
  if (!a.test.empty()) {
    std::vector<Prediction> preds;
    for (const auto& s : test_set.sentences) {
      Prediction p;
      for (const auto& t : s.tokens) p.labels.push_back(predict_baseline(m, t.text));
      preds.push_back(std::move(p));
    }
    {
      auto f = open_out(dir / "predictions.tsv");
      write_predictions(f, test_set, preds, m.scheme, false);
    }
    const EvalReport rep = evaluate(preds, test_set);
    auto f = open_out(dir / "report.txt");
    write_report_text(f, rep);
    out << "test_accuracy = " << rep.accuracy << '\n';
  }
  return kOk;
}

// ---- synth ----

struct SynthArgs {
  std::string spec, out, split_dir;
  std::vector<double> split{0.8, 0.1, 0.1};
  std::optional<std::uint64_t> seed;
};

int cmd_synth(SynthArgs& a, std::ostream& out) {
  require_file(a.spec, "generator spec");
  const SynthSpec spec = read_synth_spec(a.spec);
  const Dataset ds = synth_corpus(spec, a.seed);
  if (a.out.empty()) {
    write_token_file(out, ds);
  } else {
    auto f = open_out(a.out);
    write_token_file(f, ds);
  }
  if (!a.split_dir.empty()) {
    if (a.split.size() != 3) throw SplitError("--split takes three ratios");
    const auto parts = split_by_author(ds, {a.split[0], a.split[1], a.split[2]},
                                       derive_seed(a.seed.value_or(spec.seed), "cli:split"));
    const fs::path dir(a.split_dir);
    for (auto [name, part] : {std::pair{"train.tsv", &parts.train}, {"val.tsv", &parts.val}, {"test.tsv", &parts.test}}) {
      auto f = open_out(dir / name);
      write_token_file(f, *part);
    }
  }
  return kOk;
}

// ---- embed-train ----

struct EmbedArgs {
  std::vector<std::string> inputs;
  std::string out, format = "tokens";
  SgnsParams p;
};

int cmd_embed_train(EmbedArgs& a, std::ostream& out) {
  if (a.inputs.empty()) throw IoError("no input files given");
  std::vector<std::vector<std::string>> sentences;
  for (const auto& path : a.inputs) {
    require_file(path, "input");
    if (a.format == "tokens") {
      // Labels are irrelevant here; read the first column only.
      std::ifstream in(path);
      std::string line;
      std::vector<std::string> cur;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
          if (!cur.empty()) sentences.push_back(std::move(cur));
          cur.clear();
          continue;
        }
        if (line.starts_with("# author=") && line.find('\t') == std::string::npos) continue;
        cur.emplace_back(split(line, '\t')[0]);
      }
      if (!cur.empty()) sentences.push_back(std::move(cur));
    } else {
      std::ifstream in(path);
      std::string line;
      while (std::getline(in, line)) {
        std::vector<std::string> cur;
        std::istringstream words(line);
        for (std::string w; words >> w;) cur.push_back(w);
        if (!cur.empty()) sentences.push_back(std::move(cur));
      }
    }
  }
  const PretrainedEmbeddings pe = train_skipgram(sentences, a.p);
  auto f = open_out(a.out);
  save_embeddings_text(f, pe);
  out << "words = " << pe.size() << "\ndim = " << pe.dim() << '\n';
  return kOk;
}

// ---- grad-check ----

struct GradArgs {
  std::string arch = "elman";
  RnnConfig cfg;
  Index length = 4;
  Index words = 30;
  Index ngrams = 40;
  GradCheckOptions opts;
};

int cmd_grad_check(GradArgs& a, std::ostream& out) {
  a.cfg.arch = parse_arch(a.arch);
  if (!a.cfg.use_pretrained) a.cfg.pretrained_dim = 0;
  if (a.words < 2 || a.ngrams < 2 || a.length < 1) throw DimensionError("grad-check sizes must be positive");
  const GradCheckInstance inst = random_instance(a.cfg, a.length, TableLayout{a.words, a.ngrams}, a.cfg.seed);
  a.opts.sample_seed = a.cfg.seed;
  const GradCheckReport rep = check_gradients(inst.params, inst.config, inst.sentence, a.opts);
  write_grad_check_report(out, rep);
  return rep.passed ? kOk : kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Token-level language identification for code-switched text"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.name("csrnn");
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train an Elman or Jordan tagger");
  add_config_option(train_cmd);
  train_cmd->add_option("--train", ta.train, "training token file");
  train_cmd->add_option("--val", ta.val, "validation token file (default: author split of --train)");
  train_cmd->add_option("--test", ta.test, "optional test token file");
  train_cmd->add_option("--split", ta.split, "train/val/test ratios used when --val is absent")->expected(3);
  train_cmd->add_option("--pretrained", ta.pretrained, "pretrained embeddings (text format)");
  train_cmd->add_option("--scheme", ta.scheme, "cs6, langid, or comma-separated labels");
  train_cmd->add_option("--out", ta.out, "output directory");
  add_model_flags(train_cmd, ta);

  TagArgs tg;
  auto* tag_cmd = app.add_subcommand("tag", "tag a token file with a trained model");
  add_config_option(tag_cmd);
  tag_cmd->add_option("--model", tg.model)->required();
  tag_cmd->add_option("--input,--test", tg.input, "token file; labels optional")->required();
  tag_cmd->add_option("--out", tg.out, "predictions TSV (default stdout)");
  tag_cmd->add_option("--scheme", tg.scheme, "expected label scheme");
  tag_cmd->add_flag("--probs", tg.probs, "append per-label probabilities");

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold labels");
  add_config_option(eval_cmd);
  eval_cmd->add_option("--pred", ea.pred)->required();
  eval_cmd->add_option("--gold,--test", ea.gold)->required();
  eval_cmd->add_option("--scheme", ea.scheme);
  eval_cmd->add_option("--model", ea.model, "take the label scheme from a model file");
  eval_cmd->add_option("--out", ea.out, "directory for report.txt, report.json, confusion.tsv");

  BaselineArgs ba;
  auto* base_cmd = app.add_subcommand("baseline", "fit and apply the lexical frequency baseline");
  add_config_option(base_cmd);
  base_cmd->add_option("--train", ba.train);
  base_cmd->add_option("--test", ba.test);
  base_cmd->add_option("--scheme", ba.scheme);
  base_cmd->add_option("--pair", ba.pair, "language pair mapped onto lang1,lang2 (langid scheme)");
  base_cmd->add_option("--out", ba.out);

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic code-switched corpus");
  synth_cmd->add_option("--spec,--config", sa.spec, "generator description")->required();
  synth_cmd->add_option("--seed", sa.seed, "overrides the spec's seed");
  synth_cmd->add_option("--out", sa.out, "token file (default stdout)");
  synth_cmd->add_option("--split-dir", sa.split_dir, "also write an author split here");
  synth_cmd->add_option("--split", sa.split)->expected(3);

  EmbedArgs em;
  auto* embed_cmd = app.add_subcommand("embed-train", "train skip-gram embeddings");
  add_config_option(embed_cmd);
  embed_cmd->add_option("--input,--train", em.inputs, "input files")->required();
  embed_cmd->add_option("--format", em.format, "tokens (token files) or text (one sentence per line)")
      ->check(CLI::IsMember({"tokens", "text"}));
  embed_cmd->add_option("--out", em.out)->required();
  embed_cmd->add_option("--dim", em.p.dim);
  embed_cmd->add_option("--window", em.p.window);
  embed_cmd->add_option("--negatives", em.p.negatives);
  embed_cmd->add_option("--learning-rate,--learning_rate", em.p.learning_rate);
  embed_cmd->add_option("--epochs", em.p.epochs);
  embed_cmd->add_option("--min-count,--min_count", em.p.min_count);
  embed_cmd->add_option("--seed", em.p.seed);

  GradArgs ga;
  ga.cfg.dim_emb = 4;
  ga.cfg.hidden = 6;
  ga.cfg.num_labels = 6;
  ga.cfg.pretrained_dim = 5;
  auto* grad_cmd = app.add_subcommand("grad-check", "compare backprop gradients with finite differences");
  add_config_option(grad_cmd);
  grad_cmd->add_option("--arch", ga.arch)->check(CLI::IsMember({"elman", "jordan"}));
  grad_cmd->add_flag("--use-ngrams,--use_ngrams", ga.cfg.use_ngrams);
  grad_cmd->add_flag("--use-pretrained,--use_pretrained", ga.cfg.use_pretrained);
  grad_cmd->add_option("--pretrained-dim,--pretrained_dim", ga.cfg.pretrained_dim);
  grad_cmd->add_option("--dim-emb,--dim_emb", ga.cfg.dim_emb);
  grad_cmd->add_option("--hidden", ga.cfg.hidden);
  grad_cmd->add_option("--labels", ga.cfg.num_labels);
  grad_cmd->add_option("--bptt-depth,--bptt_depth", ga.cfg.bptt_depth);
  grad_cmd->add_option("--length", ga.length, "sentence length");
  grad_cmd->add_option("--words", ga.words, "word table rows");
  grad_cmd->add_option("--ngram-rows", ga.ngrams, "n-gram table rows");
  grad_cmd->add_option("--epsilon", ga.opts.epsilon);
  grad_cmd->add_option("--tolerance", ga.opts.tolerance);
  grad_cmd->add_option("--max-entries", ga.opts.max_entries_per_tensor, "sample at most this many entries per tensor");
  grad_cmd->add_option("--seed", ga.cfg.seed);
  grad_cmd->add_flag("--corrupt-gradient", ga.opts.corrupt_gradient, "fault injection for testing the checker");

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args, {"train", "tag", "eval", "baseline", "embed-train", "grad-check"});
  } catch (const IoError& e) {
    err << "csrnn: " << e.what() << '\n';
    return kIoFailure;
  } catch (const std::exception& e) {
    err << "csrnn: " << e.what() << '\n';
    return kFailure;
  }
  std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train_cmd) return cmd_train(*train_cmd, ta, out);
    if (*tag_cmd) return cmd_tag(tg, out);
    if (*eval_cmd) return cmd_eval(ea, out);
    if (*base_cmd) return cmd_baseline(ba, out);
    if (*synth_cmd) return cmd_synth(sa, out);
    if (*embed_cmd) return cmd_embed_train(em, out);
    if (*grad_cmd) return cmd_grad_check(ga, out);
  } catch (const IoError& e) {
    err << "csrnn: " << e.what() << '\n';
    return kIoFailure;
  } catch (const std::exception& e) {
    err << "csrnn: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace csrnn::cli
