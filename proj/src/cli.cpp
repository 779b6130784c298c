#include "morph/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "morph/corpus.hpp"
#include "morph/error.hpp"
#include "morph/evaluate.hpp"
#include "morph/polyglot.hpp"
#include "morph/schema.hpp"
#include "morph/text.hpp"
#include "morph/train.hpp"

namespace morph::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kLogFormat = "# morphtag-log 1";
constexpr std::string_view kPredictionFormat = "# morphtag-predictions 1";
constexpr std::string_view kTraceFormat = "# morphtag-attention 1";
constexpr std::string_view kReportFormat = "# morphtag-report 1";

struct Options {
  std::vector<std::string> train_files;
  std::string train, dev, test, gold, predicted;
  std::string dict, cluster, cluster_name, data_root;
  std::string mode = "mdcrf";
  std::string checkpoint, out, lang, uriel;
  std::uint64_t seed = 13;
  double lr = 0.015;
  std::optional<double> clip;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  std::size_t min_count = 1;
  std::size_t cap = 5000;
  std::size_t threads = 0;
  std::size_t projection = PolyglotProjection<float>::kDefaultWidth;
  bool pos = false;
  bool gold_pos = false;
  bool no_lang = false;
  bool no_self_attention = false;
  bool concat = false;
  bool attention = false;
  bool transitions = false;
  bool per_feature = false;
  bool strict = false;
  bool overwrite = false;
};

void require_path(const std::string& path, std::string_view flag) {
  if (path.empty()) throw ConfigError(std::string(flag) + " is required");
  std::error_code ec;
  if (!fs::exists(path, ec)) throw ConfigError(std::string(flag) + ": no such file or directory: " + path);
}

void require_value(const std::string& value, std::string_view flag) {
  if (value.empty()) throw ConfigError(std::string(flag) + " is required");
}

void check_output(const std::string& out, bool overwrite) {
  require_value(out, "--out");
  std::error_code ec;
  if (fs::exists(out, ec) && !overwrite) {
    throw ConfigError("--out: " + out + " already exists (pass --overwrite to replace it)");
  }
}

// Files land in a hidden sibling directory that is renamed into place on
// commit; nothing is left behind if the command fails first.
class StagedDir {
 public:
  StagedDir(fs::path target, bool overwrite) : target_(std::move(target)), overwrite_(overwrite) {
    const fs::path parent = target_.has_parent_path() ? target_.parent_path() : fs::path(".");
    fs::create_directories(parent);
    staging_ = parent / ("." + target_.filename().string() + ".partial");
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  StagedDir(const StagedDir&) = delete;
  StagedDir& operator=(const StagedDir&) = delete;
  ~StagedDir() {
    std::error_code ec;
    if (!committed_) fs::remove_all(staging_, ec);
  }

  void write(const fs::path& relative, const std::string& content) const {
    const fs::path path = staging_ / relative;
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw IoError("cannot write " + path.string());
  }

  void commit() {
    if (fs::exists(target_)) {
      if (!overwrite_) throw ConfigError(target_.string() + " already exists");
      fs::remove_all(target_);
    }
    fs::rename(staging_, target_);
    committed_ = true;
  }

 private:
  fs::path target_;
  fs::path staging_;
  bool overwrite_;
  bool committed_ = false;
};

UnmappedPolicy policy(const Options& o) { return o.strict ? UnmappedPolicy::kStrict : UnmappedPolicy::kLenient; }

FeatureDictionary load_dictionary(const Options& o, std::ostream& err) {
  require_path(o.dict, "--dict");
  std::vector<std::string> warnings;
  auto dict = FeatureDictionary::load(o.dict, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return dict;
}

void report_warnings(const Corpus& c, std::ostream& err) {
  constexpr std::size_t kShown = 5;
  for (std::size_t i = 0; i < c.warnings.size() && i < kShown; ++i) err << "warning: " << c.warnings[i] << '\n';
  if (c.warnings.size() > kShown) {
    err << "warning: " << c.warnings.size() - kShown << " more warnings for " << c.language << '\n';
  }
}

Corpus load_corpus(const fs::path& path, Split split, const std::string& language, const FeatureDictionary* dict,
                   const Options& o, std::ostream& err) {
  ReadOptions ro;
  ro.dictionary = dict;
  ro.policy = policy(o);
  std::error_code ec;
  const fs::path file = fs::is_directory(path, ec) ? resolve_split(path, split) : path;
  auto c = read_conllu(file, language, ro);
  report_warnings(c, err);
  return c;
}

std::string conllu_text(const Corpus& corpus, const std::vector<std::vector<std::string>>& tags) {
  std::ostringstream s;
  s << kPredictionFormat << '\n';
  write_conllu(s, corpus, &tags);
  return s.str();
}

TrainConfig train_config(const Options& o) {
  TrainConfig t;
  t.learning_rate = o.lr;
  t.max_epochs = o.max_epochs;
  t.patience = o.patience;
  t.seed = o.seed;
  t.clip_norm = o.clip;
  t.validate();
  return t;
}

std::string log_header(const std::string& what, const Options& o) {
  std::ostringstream s;
  s << kLogFormat << '\n';
  s << "# " << what << " mode=" << o.mode << " seed=" << o.seed << " lr=" << text::format_real(o.lr)
    << " max_epochs=" << o.max_epochs << " patience=" << o.patience << '\n';
  return s.str();
}

const LanguageCluster& load_cluster(const Options& o, std::vector<LanguageCluster>& storage) {
  require_path(o.cluster, "--cluster");
  require_value(o.cluster_name, "--cluster-name");
  std::optional<fs::path> root;
  if (!o.data_root.empty()) {
    require_path(o.data_root, "--data-root");
    root = fs::path(o.data_root);
  }
  storage = load_cluster_config(o.cluster, root);
  return find_cluster(storage, o.cluster_name);
}

// URIEL rows are keyed by ISO code; cluster members by treebank id.
TypologyTable uriel_for(const Options& o, const std::vector<std::string>& members) {
  require_path(o.uriel, "--uriel");
  std::vector<std::string> iso;
  for (const auto& m : members) {
    const auto cut = m.find('_');
    iso.push_back(cut == std::string::npos ? m : m.substr(0, cut));
  }
  std::vector<std::string> unique = iso;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  const auto table = load_uriel_subset(o.uriel, unique);
  std::vector<TypologyVector> rows;
  for (std::size_t i = 0; i < members.size(); ++i) {
    auto row = table.row(iso[i]);
    row.language = members[i];
    rows.push_back(std::move(row));
  }
  return TypologyTable(table.features(), std::move(rows));
}

int cmd_schema(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.train_files.empty()) throw ConfigError("--train is required");
  const auto dict = load_dictionary(o, err);
  std::vector<MorphAnnotation> annotations;
  std::size_t unmapped = 0;
  for (const auto& f : o.train_files) {
    require_path(f, "--train");
    const auto c = load_corpus(f, Split::kTrain, language_from_path(f), &dict, o, err);
    unmapped += c.unmapped;
    const auto a = c.annotations();
    annotations.insert(annotations.end(), a.begin(), a.end());
  }
  const auto schema = FeatureSchema::build(annotations);
  if (unmapped > 0) err << "warning: " << unmapped << " unmapped values dropped\n";
  if (o.out.empty()) {
    out << schema.serialize();
  } else {
    std::error_code ec;
    if (fs::exists(o.out, ec) && !o.overwrite) throw ConfigError("--out: " + o.out + " already exists");
    std::ofstream f(o.out, std::ios::binary);
    f << schema.serialize();
    if (!f) throw IoError("cannot write " + o.out);
    out << "schema: " << schema.dimensions().size() << " dimensions -> " << o.out << '\n';
  }
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const Mode mode = parse_mode(o.mode);
  const bool multi = mode == Mode::kMulti || mode == Mode::kMultiPolyglot;
  check_output(o.out, o.overwrite);
  auto dict = load_dictionary(o, err);

  TrainRequest req;
  req.mode = mode;
  req.with_pos = o.pos;
  req.gold_pos = o.gold_pos;
  req.ablate_language = o.no_lang;
  req.min_count = o.min_count;
  req.train = train_config(o);
  req.model.encoder.self_attention = !o.no_self_attention;
  req.model.polyglot_width = o.projection;
  req.model.polyglot_concat = o.concat;
  if (!multi && (o.pos || o.no_lang)) throw ConfigError("--pos and --no-lang apply to the multi modes only");
  if (mode == Mode::kMultiPolyglot && o.no_lang) throw ConfigError("--no-lang cannot be combined with multi+polyglot");

  Corpus train, dev;
  std::vector<Corpus> members;
  TypologyTable typology;
  if (multi) {
    std::vector<LanguageCluster> clusters;
    const auto& cluster = load_cluster(o, clusters);
    std::vector<std::string> languages;
    for (const auto& m : cluster.members) {
      members.push_back(load_corpus(m.path, Split::kTrain, m.language, &dict, o, err));
      auto d = load_corpus(m.path, Split::kDev, m.language, &dict, o, err);
      for (auto& s : d.sentences) {
        s.sentinels = true;
        dev.sentences.push_back(std::move(s));
      }
      languages.push_back(m.language);
    }
    dev.language = cluster.name;
    ClusterPlan plan;
    train = prepare_cluster(cluster, members, o.cap, o.seed, &plan);
    out << "cluster " << cluster.name << ": " << cluster.members.size() << " members, " << plan.target
        << " sentences each\n";
    if (mode == Mode::kMultiPolyglot) {
      if (!o.uriel.empty()) {
        typology = uriel_for(o, languages);
      } else {
        std::vector<const Corpus*> ptrs;
        for (const auto& m : members) ptrs.push_back(&m);
        typology = build_cluster_typology(ptrs);
      }
    }
  } else {
    require_path(o.train, "--train");
    const std::string lang = o.lang.empty() ? language_from_path(o.train) : o.lang;
    train = load_corpus(o.train, Split::kTrain, lang, &dict, o, err);
    if (!o.dev.empty()) {
      require_path(o.dev, "--dev");
      dev = load_corpus(o.dev, Split::kTrain, lang, &dict, o, err);
    } else if (fs::is_directory(o.train)) {
      dev = load_corpus(o.train, Split::kDev, lang, &dict, o, err);
    } else {
      throw ConfigError("--dev is required when --train is a file");
    }
  }
  if (train.sentences.empty()) throw ConfigError("--train: no sentences");
  if (dev.sentences.empty()) throw ConfigError("--dev: no sentences");

  std::vector<const Corpus*> sources;
  for (const auto& m : members) sources.push_back(&m);
  std::ostringstream log, pos_log;
  log << log_header("train", o) << "# analyzer\n";
  pos_log << log_header("train", o) << "# pos tagger\n";
  auto sys = train_system(train, dev, sources, req, typology, std::move(dict), &log, &pos_log);

  const auto dev_tags = sys.predict_tags(dev);
  std::vector<std::pair<std::string, std::string>> extra = {{"train.log", log.str()},
                                                            {"dev_predictions.conllu", conllu_text(dev, dev_tags)}};
  if (sys.uses_pos_tagger()) extra.emplace_back("pos_tagger/train.log", pos_log.str());
  save_checkpoint(o.out, sys, o.overwrite, extra);
  out << "best dev accuracy " << text::format_real(sys.summary.best_dev_accuracy) << " at epoch "
      << sys.summary.best_epoch << " -> " << o.out << '\n';
  return kExitOk;
}

int cmd_finetune(const Options& o, std::ostream& out, std::ostream& err) {
  require_path(o.checkpoint, "--checkpoint");
  require_path(o.train, "--train");
  check_output(o.out, o.overwrite);
  auto base = load_checkpoint(o.checkpoint);
  const auto& languages = base.analyzer->vocabulary().languages();
  std::string lang = o.lang.empty() ? language_from_path(o.train) : o.lang;
  if (lang.empty() && languages.size() == 1) lang = languages.front();
  const auto& dict = base.dictionary;
  Corpus train = load_corpus(o.train, Split::kTrain, lang, &dict, o, err);
  Corpus dev;
  if (!o.dev.empty()) {
    require_path(o.dev, "--dev");
    dev = load_corpus(o.dev, Split::kTrain, lang, &dict, o, err);
  } else if (fs::is_directory(o.train)) {
    dev = load_corpus(o.train, Split::kDev, lang, &dict, o, err);
  } else {
    throw ConfigError("--dev is required when --train is a file");
  }
  if (train.sentences.empty()) throw ConfigError("--train: no sentences");
  if (dev.sentences.empty()) throw ConfigError("--dev: no sentences");

  std::ostringstream log, pos_log;
  log << log_header("finetune " + lang, o) << "# analyzer\n";
  pos_log << log_header("finetune " + lang, o) << "# pos tagger\n";
  auto sys = finetune_system(std::move(base), train, dev, train_config(o), &log, &pos_log);
  const auto dev_tags = sys.predict_tags(dev);
  std::vector<std::pair<std::string, std::string>> extra = {{"train.log", log.str()},
                                                            {"dev_predictions.conllu", conllu_text(dev, dev_tags)}};
  if (sys.uses_pos_tagger()) extra.emplace_back("pos_tagger/train.log", pos_log.str());
  save_checkpoint(o.out, sys, o.overwrite, extra);
  out << "best dev accuracy " << text::format_real(sys.summary.best_dev_accuracy) << " at epoch "
      << sys.summary.best_epoch << " -> " << o.out << '\n';
  return kExitOk;
}

std::string attention_trace(const Sentence& s, const std::vector<num::Tensor<float>>& attention, bool sentinels) {
  std::vector<std::string> forms;
  if (sentinels) forms.push_back(sentinel_marker(s.language));
  for (const auto& t : s.tokens) forms.push_back(t.form);
  if (sentinels) forms.push_back(sentinel_marker(s.language));
  std::ostringstream out;
  out << kTraceFormat << '\n';
  for (std::size_t k = 0; k < attention.size() && k < forms.size(); ++k) {
    const auto& a = attention[k];
    const auto chars = text::utf8_decode(forms[k]);
    out << "token\t" << k << '\t' << forms[k] << '\n';
    for (std::size_t i = 0; i < a.dim(0); ++i) {
      out << (i < chars.size() ? text::utf8_encode(chars[i]) : "?");
      for (std::size_t j = 0; j < a.dim(1); ++j) out << '\t' << text::format_real(a.at(i, j));
      out << '\n';
    }
  }
  return out.str();
}

std::string sentence_file(std::size_t index) {
  std::string n = std::to_string(index + 1);
  return "sentence-" + std::string(n.size() < 5 ? 5 - n.size() : 0, '0') + n + ".tsv";
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream& err) {
  require_path(o.checkpoint, "--checkpoint");
  const std::string& input = o.test;
  require_path(input, "--test");
  check_output(o.out, o.overwrite);
  const auto sys = load_checkpoint(o.checkpoint);
  const auto& analyzer = *sys.analyzer;
  const auto& languages = analyzer.vocabulary().languages();
  std::string lang = o.lang;
  if (lang.empty()) lang = languages.size() == 1 ? languages.front() : language_from_path(input);

  Corpus corpus = load_corpus(input, Split::kTest, lang, nullptr, o, err);
  StagedDir staged(o.out, o.overwrite);
  if (corpus.sentences.empty()) {
    err << "warning: " << input << " has no sentences; writing an empty prediction file\n";
    staged.write("predictions.conllu", std::string(kPredictionFormat) + "\n");
    staged.commit();
    return kExitOk;
  }

  std::vector<std::vector<std::string>> tags;
  if (o.attention) {
    auto refs = sentence_refs(corpus);
    sys.prepare(refs);
    const bool sentinels = analyzer.config().use_sentinels;
    for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
      const auto p = analyzer.predict(corpus.sentences[s], true);
      std::vector<std::string> row;
      for (const auto& a : p.tokens) row.push_back(analyzer.schema().compose(a));
      tags.push_back(std::move(row));
      staged.write(fs::path("attention") / sentence_file(s), attention_trace(corpus.sentences[s], p.attention, sentinels));
    }
  } else {
    tags = sys.predict_tags(corpus);
  }
  staged.write("predictions.conllu", conllu_text(corpus, tags));
  if (o.transitions) {
    for (const auto& layer : analyzer.decoders().layers()) {
      std::ostringstream t;
      layer.export_transitions(t);
      staged.write(fs::path("transitions") / (layer.dimension() + ".tsv"), t.str());
    }
  }
  staged.commit();
  out << "predicted " << corpus.token_count() << " tokens in " << corpus.sentences.size() << " sentences -> "
      << o.out << '\n';
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  require_path(o.gold, "--gold");
  require_path(o.predicted, "--pred");
  if (!o.out.empty()) check_output(o.out, o.overwrite);
  const auto dict = load_dictionary(o, err);
  const auto gold = load_corpus(o.gold, Split::kTrain, "gold", &dict, o, err);
  const auto pred = load_corpus(o.predicted, Split::kTrain, "pred", &dict, o, err);
  const auto report = evaluate_corpora(gold, pred);
  out << report.text();
  if (o.per_feature) out << report.feature_table();
  if (!o.out.empty()) {
    StagedDir staged(o.out, o.overwrite);
    staged.write("report.tsv", std::string(kReportFormat) + "\n" + report.tsv());
    if (o.per_feature) staged.write("features.tsv", report.feature_table());
    staged.commit();
  }
  return kExitOk;
}

int cmd_typology(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<LanguageCluster> clusters;
  const auto& cluster = load_cluster(o, clusters);
  TypologyTable table;
  if (!o.uriel.empty()) {
    std::vector<std::string> languages;
    for (const auto& m : cluster.members) languages.push_back(m.language);
    table = uriel_for(o, languages);
  } else {
    const auto dict = load_dictionary(o, err);
    std::vector<Corpus> corpora;
    for (const auto& m : cluster.members) {
      corpora.push_back(load_corpus(m.path, Split::kTrain, m.language, &dict, o, err));
      if (corpora.back().sentences.empty()) throw ClusterError("no training sentences for language " + m.language);
    }
    std::vector<const Corpus*> ptrs;
    for (const auto& c : corpora) ptrs.push_back(&c);
    table = build_cluster_typology(ptrs);
  }
  std::ostringstream s;
  table.write(s);
  if (o.out.empty()) {
    out << s.str();
    return kExitOk;
  }
  check_output(o.out, o.overwrite);
  const fs::path target(o.out);
  const fs::path staging = target.parent_path() / ("." + target.filename().string() + ".partial");
  {
    std::ofstream f(staging, std::ios::binary);
    f << s.str();
    if (!f) throw IoError("cannot write " + staging.string());
  }
  fs::rename(staging, target);
  out << "typology: " << table.rows().size() << " languages x " << table.width() << " features -> " << o.out << '\n';
  return kExitOk;
}

void add_training_flags(CLI::App* c, Options& o) {
  c->add_option("--seed", o.seed, "random seed")->capture_default_str();
  c->add_option("--lr", o.lr, "SGD learning rate")->capture_default_str();
  c->add_option("--max-epochs", o.max_epochs, "epoch limit")->capture_default_str();
  c->add_option("--patience", o.patience, "epochs without dev improvement before stopping")->capture_default_str();
  c->add_option("--clip", o.clip, "global gradient norm clip");
  c->add_flag("--overwrite", o.overwrite, "replace an existing --out directory");
}

}  // namespace

std::string language_from_path(const std::string& path) {
  fs::path p(path);
  std::error_code ec;
  if (fs::is_directory(p, ec)) {
    try {
      p = resolve_split(p, Split::kTrain);
    } catch (const Error&) {
      return p.filename().empty() ? p.parent_path().filename().string() : p.filename().string();
    }
  }
  const std::string name = p.filename().string();
  const auto cut = name.find('-');
  if (cut != std::string::npos) return name.substr(0, cut);
  const auto dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"morphtag: neural CRF morphological tagging"};
  app.require_subcommand(1);
  app.add_option("--threads", o.threads, "OpenMP threads (0 keeps the runtime default)");

  auto* schema = app.add_subcommand("schema", "print the feature schema of one or more corpora");
  schema->add_option("--train", o.train_files, "CoNLL-U files or treebank directories")->required();
  schema->add_option("--dict", o.dict, "UniMorph value-to-dimension dictionary");
  schema->add_option("--out", o.out, "write the schema here instead of stdout");
  schema->add_flag("--strict", o.strict, "fail on values missing from the dictionary");
  schema->add_flag("--overwrite", o.overwrite, "replace an existing --out file");

  auto* train = app.add_subcommand("train", "train a tagger and write a checkpoint directory");
  train->add_option("--train", o.train, "training CoNLL-U file or treebank directory");
  train->add_option("--dev", o.dev, "dev CoNLL-U file");
  train->add_option("--dict", o.dict, "UniMorph value-to-dimension dictionary");
  train->add_option("--lang", o.lang, "language id of a single-language run");
  train->add_option("--mode", o.mode, "mdcrf, mdcrf+pos, multi or multi+polyglot")->capture_default_str();
  train->add_option("--cluster", o.cluster, "cluster configuration file");
  train->add_option("--cluster-name", o.cluster_name, "cluster to train on");
  train->add_option("--data-root", o.data_root, "root for relative cluster paths");
  train->add_option("--cap", o.cap, "per-language sentence cap of a cluster")->capture_default_str();
  train->add_option("--uriel", o.uriel, "URIEL feature table replacing corpus typology");
  train->add_option("--projection", o.projection, "typology projection width")->capture_default_str();
  train->add_flag("--concat", o.concat, "concatenate the polyglot factor to the encoder states");
  train->add_flag("--pos", o.pos, "separate POS tagger feeding the multi-source analyzer");
  train->add_flag("--gold-pos", o.gold_pos, "analyzer reads gold POS during training");
  train->add_flag("--no-lang", o.no_lang, "drop language embeddings and sentinels");
  train->add_flag("--no-self-attention", o.no_self_attention, "plain character BiLSTM");
  train->add_option("--min-count", o.min_count, "rarer words map to UNK")->capture_default_str();
  train->add_option("--out", o.out, "checkpoint directory");
  train->add_flag("--strict", o.strict, "fail on values missing from the dictionary");
  add_training_flags(train, o);

  auto* finetune = app.add_subcommand("finetune", "continue training a checkpoint on one language");
  finetune->add_option("--checkpoint", o.checkpoint, "checkpoint to start from");
  finetune->add_option("--train", o.train, "target training file or treebank directory");
  finetune->add_option("--dev", o.dev, "target dev file");
  finetune->add_option("--lang", o.lang, "target language id");
  finetune->add_option("--out", o.out, "new checkpoint directory");
  finetune->add_flag("--strict", o.strict, "fail on values missing from the dictionary");
  add_training_flags(finetune, o);

  auto* predict = app.add_subcommand("predict", "tag a CoNLL-U file");
  predict->add_option("--checkpoint", o.checkpoint, "checkpoint directory");
  predict->add_option("--test,--input", o.test, "CoNLL-U file or treebank directory");
  predict->add_option("--lang", o.lang, "language id of the input");
  predict->add_option("--out", o.out, "output directory");
  predict->add_flag("--attention", o.attention, "write character attention traces per sentence");
  predict->add_flag("--transitions", o.transitions, "write per-dimension transition tables");
  predict->add_flag("--overwrite", o.overwrite, "replace an existing --out directory");

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold annotations");
  evaluate->add_option("--gold", o.gold, "gold CoNLL-U file");
  evaluate->add_option("--pred", o.predicted, "predicted CoNLL-U file");
  evaluate->add_option("--dict", o.dict, "UniMorph value-to-dimension dictionary");
  evaluate->add_option("--out", o.out, "also write the report to this directory");
  evaluate->add_flag("--per-feature", o.per_feature, "per-dimension error and prediction counts");
  evaluate->add_flag("--strict", o.strict, "fail on values missing from the dictionary");
  evaluate->add_flag("--overwrite", o.overwrite, "replace an existing --out directory");

  auto* typology = app.add_subcommand("typology", "per-language typology table of a cluster");
  typology->add_option("--cluster", o.cluster, "cluster configuration file");
  typology->add_option("--cluster-name", o.cluster_name, "cluster name");
  typology->add_option("--data-root", o.data_root, "root for relative cluster paths");
  typology->add_option("--dict", o.dict, "UniMorph value-to-dimension dictionary");
  typology->add_option("--uriel", o.uriel, "URIEL feature table instead of corpus statistics");
  typology->add_option("--out", o.out, "write the table here instead of stdout");
  typology->add_flag("--overwrite", o.overwrite, "replace an existing --out file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

#ifdef _OPENMP
  if (o.threads > 0) omp_set_num_threads(static_cast<int>(o.threads));
#endif

  try {
    if (schema->parsed()) return cmd_schema(o, out, err);
    if (train->parsed()) return cmd_train(o, out, err);
    if (finetune->parsed()) return cmd_finetune(o, out, err);
    if (predict->parsed()) return cmd_predict(o, out, err);
    if (evaluate->parsed()) return cmd_evaluate(o, out, err);
    if (typology->parsed()) return cmd_typology(o, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace morph::cli
