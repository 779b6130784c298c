#include "morph/train.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "morph/error.hpp"
#include "morph/num/optimizer.hpp"
#include "morph/text.hpp"

namespace morph {

namespace fs = std::filesystem;

Mode parse_mode(std::string_view s) {
  if (s == "mdcrf") return Mode::kMdcrf;
  if (s == "mdcrf+pos") return Mode::kMdcrfPos;
  if (s == "multi") return Mode::kMulti;
  if (s == "multi+polyglot") return Mode::kMultiPolyglot;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected mdcrf, mdcrf+pos, multi or multi+polyglot)");
}

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::kMdcrf: return "mdcrf";
    case Mode::kMdcrfPos: return "mdcrf+pos";
    case Mode::kMulti: return "multi";
    case Mode::kMultiPolyglot: return "multi+polyglot";
  }
  return "mdcrf";
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
  if (patience == 0) throw ConfigError("patience must be positive");
  if (clip_norm && !(*clip_norm > 0.0)) throw ConfigError("clipping norm must be positive");
}

std::string EpochRecord::header() { return "epoch\ttrain_loss\tdev_acc\tdev_f1_micro\tbest_dev_acc"; }

std::string EpochRecord::line() const {
  return std::to_string(epoch) + "\t" + text::format_real(train_loss) + "\t" + text::format_real(dev_accuracy) + "\t" +
         text::format_real(dev_f1_micro) + "\t" + text::format_real(best_dev_accuracy);
}

std::vector<const Sentence*> sentence_view(const Corpus& corpus) {
  std::vector<const Sentence*> out;
  out.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) out.push_back(&s);
  return out;
}

std::vector<Sentence*> sentence_refs(Corpus& corpus) {
  std::vector<Sentence*> out;
  out.reserve(corpus.sentences.size());
  for (auto& s : corpus.sentences) out.push_back(&s);
  return out;
}

template <typename T>
std::vector<std::vector<MorphAnnotation>> predict_corpus(const Tagger<T>& tagger,
                                                         const std::vector<const Sentence*>& sentences,
                                                         bool parallel) {
  std::vector<std::vector<MorphAnnotation>> out(sentences.size());
  const auto n = static_cast<std::ptrdiff_t>(sentences.size());
#ifdef _OPENMP
  if (parallel && n > 1) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        out[i] = tagger.predict(*sentences[i]).tokens;
      } catch (...) {
#pragma omp critical(morph_predict_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    return out;
  }
#else
  (void)parallel;
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = tagger.predict(*sentences[i]).tokens;
  return out;
}

template <typename T>
EvalReport evaluate_model(const Tagger<T>& tagger, const std::vector<const Sentence*>& sentences, bool parallel) {
  const auto predicted = predict_corpus(tagger, sentences, parallel);
  std::vector<MorphAnnotation> gold, pred;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    for (std::size_t t = 0; t < sentences[s]->tokens.size(); ++t) {
      gold.push_back(restrict_to(sentences[s]->tokens[t].annotation, tagger.schema()));
      pred.push_back(restrict_to(predicted[s][t], tagger.schema()));
    }
  }
  return evaluate(gold, pred, tagger.schema().dimensions());
}

template <typename T>
TrainSummary fit(Tagger<T>& tagger, const std::vector<const Sentence*>& train, const std::vector<const Sentence*>& dev,
                 const TrainConfig& cfg, std::ostream* log) {
  cfg.validate();
  if (cfg.max_epochs > 0 && train.empty()) throw ConfigError("no training sentences");
  if (cfg.max_epochs > 0 && dev.empty()) throw ConfigError("no dev sentences for model selection");
  auto& params = tagger.params();
  num::Rng rng(cfg.seed);
  TrainSummary summary;
  summary.best_dev_accuracy = evaluate_model(tagger, dev, cfg.parallel_eval).accuracy;
  auto best = params.snapshot();
  std::size_t stale = 0;
  if (log) *log << EpochRecord::header() << '\n';

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const T lr = static_cast<T>(cfg.learning_rate);
  std::optional<T> clip;
  if (cfg.clip_norm) clip = static_cast<T>(*cfg.clip_norm);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (std::size_t i : order) {
      num::Graph<T> g(typename num::Graph<T>::Options{true, true, &rng});
      const num::Var loss = tagger.loss(g, *train[i]);
      const double value = static_cast<double>(g.value(loss).item());
      if (!std::isfinite(value)) throw NumericError("non-finite loss in epoch " + std::to_string(epoch));
      total += value;
      g.backward(loss);
      num::sgd_step(params, lr, clip);
    }
    const auto report = evaluate_model(tagger, dev, cfg.parallel_eval);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = total / static_cast<double>(train.size());
    rec.dev_accuracy = report.accuracy;
    rec.dev_f1_micro = report.f1_micro;
    if (report.accuracy > summary.best_dev_accuracy) {
      summary.best_dev_accuracy = report.accuracy;
      summary.best_epoch = epoch;
      best = params.snapshot();
      stale = 0;
    } else {
      ++stale;
    }
    rec.best_dev_accuracy = summary.best_dev_accuracy;
    summary.epochs.push_back(rec);
    if (log) *log << rec.line() << '\n';
    if (stale >= cfg.patience) break;
  }
  params.restore(best);
  return summary;
}

template <typename T>
void assign_predicted_pos(const Tagger<T>& pos_tagger, std::vector<Sentence*>& sentences, bool parallel) {
  std::vector<const Sentence*> view(sentences.begin(), sentences.end());
  const auto predicted = predict_corpus(pos_tagger, view, parallel);
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    for (std::size_t t = 0; t < sentences[s]->tokens.size(); ++t) {
      sentences[s]->tokens[t].pos = predicted[s][t].at(std::string(kPosDimension));
    }
  }
}

void assign_gold_pos(std::vector<Sentence*>& sentences) {
  for (auto* s : sentences) {
    for (auto& t : s->tokens) {
      auto it = t.annotation.find(kPosDimension);
      t.pos = it == t.annotation.end() ? std::string(kNullValue) : it->second;
    }
  }
}

void TrainedSystem::prepare(std::vector<Sentence*>& sentences, bool parallel) const {
  if (pos_tagger) assign_predicted_pos(*pos_tagger, sentences, parallel);
}

std::vector<std::vector<std::string>> TrainedSystem::predict_tags(Corpus& corpus, bool parallel) const {
  if (!analyzer) throw ContractError("system has no analyzer");
  auto refs = sentence_refs(corpus);
  prepare(refs, parallel);
  const auto predicted = predict_corpus(*analyzer, sentence_view(corpus), parallel);
  std::vector<std::vector<std::string>> out(predicted.size());
  for (std::size_t s = 0; s < predicted.size(); ++s) {
    for (const auto& a : predicted[s]) out[s].push_back(analyzer->schema().compose(a));
  }
  return out;
}

ModelConfig resolve_model_config(const TrainRequest& req) {
  ModelConfig cfg = req.model;
  const bool multi = req.mode == Mode::kMulti || req.mode == Mode::kMultiPolyglot;
  const bool pos = req.mode == Mode::kMdcrfPos || (multi && req.with_pos);
  cfg.encoder.use_pos = pos;
  cfg.decode_pos = !pos;
  cfg.encoder.use_lang = multi && !req.ablate_language;
  cfg.use_sentinels = multi && !req.ablate_language;
  cfg.polyglot = req.mode == Mode::kMultiPolyglot;
  cfg.validate();
  return cfg;
}

namespace {

void check_languages(const Vocabulary& vocab, const Corpus& corpus, const ModelConfig& cfg) {
  if (!cfg.encoder.use_lang && !cfg.use_sentinels) return;
  for (const auto& s : corpus.sentences) {
    if (!vocab.language(s.language)) {
      throw ContractError("language " + s.language + " is not a member the model was trained on");
    }
  }
}

}  // namespace

TrainedSystem train_system(Corpus& train, Corpus& dev, const std::vector<const Corpus*>& schema_sources,
                           const TrainRequest& req, const TypologyTable& typology, FeatureDictionary dictionary,
                           std::ostream* log, std::ostream* pos_log) {
  req.train.validate();
  const ModelConfig cfg = resolve_model_config(req);
  std::vector<MorphAnnotation> annotations;
  std::vector<const Sentence*> vocab_sentences;
  for (const auto* c : schema_sources.empty() ? std::vector<const Corpus*>{&train} : schema_sources) {
    for (const auto& s : c->sentences) {
      vocab_sentences.push_back(&s);
      for (const auto& t : s.tokens) annotations.push_back(t.annotation);
    }
  }
  FeatureSchema schema = FeatureSchema::build(annotations);
  Vocabulary vocab = Vocabulary::build(vocab_sentences, req.min_count);
  check_languages(vocab, train, cfg);
  check_languages(vocab, dev, cfg);

  TrainedSystem sys;
  sys.dictionary = std::move(dictionary);
  auto train_refs = sentence_refs(train);
  auto dev_refs = sentence_refs(dev);
  if (cfg.encoder.use_pos) {
    const auto& pos_labels = schema.labels(kPosDimension);
    if (pos_labels.size() < 2) throw ConfigError("the training data carries no POS values for a POS tagger");
    FeatureSchema pos_schema = FeatureSchema::from_label_spaces({{std::string(kPosDimension), pos_labels}});
    ModelConfig pos_cfg = cfg;
    pos_cfg.encoder.use_pos = false;
    pos_cfg.decode_pos = true;
    pos_cfg.polyglot = false;
    sys.pos_tagger.emplace(Tagger<float>::create(pos_cfg, pos_schema, vocab, {}, req.train.seed));
    sys.pos_summary = fit(*sys.pos_tagger, sentence_view(train), sentence_view(dev), req.train, pos_log);
    assign_predicted_pos(*sys.pos_tagger, train_refs, req.train.parallel_eval);
    assign_predicted_pos(*sys.pos_tagger, dev_refs, req.train.parallel_eval);
    if (req.gold_pos) assign_gold_pos(train_refs);
  }
  sys.analyzer.emplace(Tagger<float>::create(cfg, std::move(schema), std::move(vocab), typology, req.train.seed));
  sys.summary = fit(*sys.analyzer, sentence_view(train), sentence_view(dev), req.train, log);
  return sys;
}

TrainedSystem finetune_system(TrainedSystem base, Corpus& train, Corpus& dev, const TrainConfig& cfg,
                              std::ostream* log, std::ostream* pos_log) {
  cfg.validate();
  if (!base.analyzer) throw ContractError("fine-tuning needs a trained analyzer");
  auto& analyzer = *base.analyzer;
  check_languages(analyzer.vocabulary(), train, analyzer.config());
  check_languages(analyzer.vocabulary(), dev, analyzer.config());
  if (!train.sentences.empty()) {
    const auto target = FeatureSchema::build(train.annotations());
    const auto novel = analyzer.schema().novel_labels(target);
    if (!novel.empty()) {
      throw SchemaError("target corpus has labels the model cannot predict: " + text::join(novel, ", "));
    }
  }
  auto train_refs = sentence_refs(train);
  auto dev_refs = sentence_refs(dev);
  if (base.pos_tagger) {
    base.pos_summary = fit(*base.pos_tagger, sentence_view(train), sentence_view(dev), cfg, pos_log);
    assign_predicted_pos(*base.pos_tagger, train_refs, cfg.parallel_eval);
    assign_predicted_pos(*base.pos_tagger, dev_refs, cfg.parallel_eval);
  }
  base.summary = fit(analyzer, sentence_view(train), sentence_view(dev), cfg, log);
  return base;
}

namespace {

void write_section(std::ostream& out, std::string_view name, const std::vector<std::string>& lines) {
  out << "section\t" << name << '\t' << lines.size() << '\n';
  for (const auto& l : lines) out << l << '\n';
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

template <typename T>
constexpr std::string_view precision_name() {
  return sizeof(T) == 4 ? "float32" : "float64";
}

template <typename T>
void write_values(std::ostream& out, const num::Tensor<T>& t) {
  using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  std::vector<unsigned char> buf(t.size() * sizeof(T));
  for (std::size_t i = 0; i < t.size(); ++i) {
    Bits bits;
    std::memcpy(&bits, &t[i], sizeof(T));
    for (std::size_t b = 0; b < sizeof(T); ++b) buf[i * sizeof(T) + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

template <typename T>
void read_values(std::istream& in, num::Tensor<T>& t, const std::string& name) {
  using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  std::vector<unsigned char> buf(t.size() * sizeof(T));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw LoadError("parameter blob ends inside " + name);
  for (std::size_t i = 0; i < t.size(); ++i) {
    Bits bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) bits |= static_cast<Bits>(buf[i * sizeof(T) + b]) << (8 * b);
    std::memcpy(&t[i], &bits, sizeof(T));
  }
}

}  // namespace

template <typename T>
void write_tagger(const fs::path& dir, const Tagger<T>& tagger, const FeatureDictionary& dictionary,
                  const TrainSummary& summary) {
  fs::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt", std::ios::binary);
  if (!manifest) throw IoError("cannot write " + (dir / "manifest.txt").string());
  manifest << kCheckpointFormat << '\n';
  manifest << "precision\t" << precision_name<T>() << '\n';
  manifest << "best_dev_accuracy\t" << text::format_real(summary.best_dev_accuracy) << '\n';
  manifest << "best_epoch\t" << summary.best_epoch << '\n';

  std::vector<std::string> config;
  for (const auto& [k, v] : tagger.config().to_map()) config.push_back(k + "\t" + v);
  write_section(manifest, "config", config);

  std::vector<std::string> dict;
  for (const auto& [value, entry] : dictionary.entries()) dict.push_back(value + "\t" + entry.dimension);
  write_section(manifest, "dictionary", dict);

  write_section(manifest, "schema", lines_of(tagger.schema().serialize()));
  write_section(manifest, "vocabulary", lines_of(tagger.vocabulary().serialize()));
  std::ostringstream typ;
  if (!tagger.typology().empty()) tagger.typology().write(typ);
  write_section(manifest, "typology", lines_of(typ.str()));

  std::vector<std::string> params;
  const auto& store = tagger.params();
  for (std::size_t i = 0; i < store.size(); ++i) {
    std::vector<std::string> dims;
    for (auto d : store[i].value.shape()) dims.push_back(std::to_string(d));
    params.push_back(store[i].name + "\t" + text::join(dims, "x"));
  }
  write_section(manifest, "parameters", params);
  manifest.close();
  if (!manifest) throw IoError("failed writing " + (dir / "manifest.txt").string());

  std::ofstream blob(dir / "params.bin", std::ios::binary);
  if (!blob) throw IoError("cannot write " + (dir / "params.bin").string());
  for (std::size_t i = 0; i < store.size(); ++i) write_values(blob, store[i].value);
  blob.close();
  if (!blob) throw IoError("failed writing " + (dir / "params.bin").string());
}

LoadedTagger read_tagger(const fs::path& dir) {
  std::ifstream manifest(dir / "manifest.txt", std::ios::binary);
  if (!manifest) throw IoError("no checkpoint manifest in " + dir.string());
  std::string line;
  std::getline(manifest, line);
  if (line != kCheckpointFormat) throw LoadError(dir.string() + ": unsupported checkpoint format '" + line + "'");
  std::map<std::string, std::string> header;
  std::map<std::string, std::vector<std::string>> sections;
  while (std::getline(manifest, line)) {
    auto cols = text::split(line, '\t');
    if (cols.size() == 3 && cols[0] == "section") {
      const auto count = static_cast<std::size_t>(text::parse_int(cols[2]));
      auto& lines = sections[cols[1]];
      for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(manifest, line)) throw LoadError(dir.string() + ": truncated section " + cols[1]);
        lines.push_back(line);
      }
    } else if (cols.size() == 2) {
      header[cols[0]] = cols[1];
    } else {
      throw LoadError(dir.string() + ": malformed manifest line '" + line + "'");
    }
  }
  for (const char* name : {"config", "dictionary", "schema", "vocabulary", "typology", "parameters"}) {
    if (!sections.count(name)) throw LoadError(dir.string() + ": manifest lacks section " + name);
  }
  if (header["precision"] != "float32") throw LoadError(dir.string() + ": expected float32 parameters");

  std::map<std::string, std::string> config;
  for (const auto& l : sections["config"]) {
    auto cols = text::split(l, '\t');
    if (cols.size() != 2) throw LoadError("malformed config line '" + l + "'");
    config[cols[0]] = cols[1];
  }
  const auto cfg = ModelConfig::from_map(config);

  LoadedTagger out;
  for (const auto& l : sections["dictionary"]) {
    auto cols = text::split(l, '\t');
    if (cols.size() != 2) throw LoadError("malformed dictionary line '" + l + "'");
    out.dictionary.add(cols[0], cols[1], dir.string() + "/manifest.txt");
  }
  std::istringstream schema_in(join_lines(sections["schema"]));
  auto schema = FeatureSchema::deserialize(schema_in);
  std::istringstream vocab_in(join_lines(sections["vocabulary"]));
  auto vocab = Vocabulary::deserialize(vocab_in);
  TypologyTable typology;
  if (!sections["typology"].empty()) {
    std::istringstream typ_in(join_lines(sections["typology"]));
    typology = TypologyTable::read(typ_in, dir.string());
  }

  std::ifstream blob(dir / "params.bin", std::ios::binary);
  if (!blob) throw IoError("no parameter blob in " + dir.string());
  num::ParameterStore<float> store;
  for (const auto& l : sections["parameters"]) {
    auto cols = text::split(l, '\t');
    if (cols.size() != 2) throw LoadError("malformed parameter line '" + l + "'");
    num::Shape shape;
    for (const auto& d : text::split(cols[1], 'x')) shape.push_back(static_cast<std::size_t>(text::parse_int(d)));
    auto& p = store.add(cols[0], shape);
    read_values(blob, p.value, p.name);
  }
  if (blob.peek() != std::char_traits<char>::eof()) throw LoadError(dir.string() + ": parameter blob has trailing bytes");

  out.tagger.emplace(Tagger<float>::attach(cfg, std::move(schema), std::move(vocab), std::move(typology), std::move(store)));
  out.best_dev_accuracy = text::parse_real(header["best_dev_accuracy"]);
  out.best_epoch = static_cast<std::size_t>(text::parse_int(header["best_epoch"]));
  return out;
}

void save_checkpoint(const fs::path& dir, const TrainedSystem& system, bool overwrite,
                     const std::vector<std::pair<std::string, std::string>>& extra_files) {
  if (!system.analyzer) throw ContractError("nothing to save");
  std::error_code ec;
  if (fs::exists(dir, ec) && !overwrite) {
    throw ConfigError("output directory " + dir.string() + " already exists (pass --overwrite to replace it)");
  }
  const fs::path parent = dir.has_parent_path() ? dir.parent_path() : fs::path(".");
  fs::create_directories(parent);
  const fs::path staging = parent / ("." + dir.filename().string() + ".partial");
  fs::remove_all(staging);
  try {
    write_tagger(staging, *system.analyzer, system.dictionary, system.summary);
    if (system.pos_tagger) write_tagger(staging / "pos_tagger", *system.pos_tagger, system.dictionary, system.pos_summary);
    for (const auto& [name, content] : extra_files) {
      const fs::path target = staging / name;
      fs::create_directories(target.parent_path());
      std::ofstream f(target, std::ios::binary);
      f << content;
      if (!f) throw IoError("cannot write " + target.string());
    }
    if (fs::exists(dir)) fs::remove_all(dir);
    fs::rename(staging, dir);
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
}

TrainedSystem load_checkpoint(const fs::path& dir) {
  TrainedSystem sys;
  auto main = read_tagger(dir);
  sys.analyzer = std::move(main.tagger);
  sys.dictionary = std::move(main.dictionary);
  sys.summary.best_dev_accuracy = main.best_dev_accuracy;
  sys.summary.best_epoch = main.best_epoch;
  if (fs::exists(dir / "pos_tagger" / "manifest.txt")) {
    auto pos = read_tagger(dir / "pos_tagger");
    sys.pos_tagger = std::move(pos.tagger);
    sys.pos_summary.best_dev_accuracy = pos.best_dev_accuracy;
    sys.pos_summary.best_epoch = pos.best_epoch;
  }
  if (sys.analyzer->config().encoder.use_pos && !sys.pos_tagger) {
    throw LoadError(dir.string() + ": the analyzer reads POS but the checkpoint has no pos_tagger");
  }
  return sys;
}

template std::vector<std::vector<MorphAnnotation>> predict_corpus<float>(const Tagger<float>&,
                                                                         const std::vector<const Sentence*>&, bool);
template std::vector<std::vector<MorphAnnotation>> predict_corpus<double>(const Tagger<double>&,
                                                                          const std::vector<const Sentence*>&, bool);
template EvalReport evaluate_model<float>(const Tagger<float>&, const std::vector<const Sentence*>&, bool);
template EvalReport evaluate_model<double>(const Tagger<double>&, const std::vector<const Sentence*>&, bool);
template TrainSummary fit<float>(Tagger<float>&, const std::vector<const Sentence*>&,
                                 const std::vector<const Sentence*>&, const TrainConfig&, std::ostream*);
template TrainSummary fit<double>(Tagger<double>&, const std::vector<const Sentence*>&,
                                  const std::vector<const Sentence*>&, const TrainConfig&, std::ostream*);
template void assign_predicted_pos<float>(const Tagger<float>&, std::vector<Sentence*>&, bool);
template void assign_predicted_pos<double>(const Tagger<double>&, std::vector<Sentence*>&, bool);
template void write_tagger<float>(const fs::path&, const Tagger<float>&, const FeatureDictionary&, const TrainSummary&);
template void write_tagger<double>(const fs::path&, const Tagger<double>&, const FeatureDictionary&,
                                   const TrainSummary&);

}  // namespace morph
