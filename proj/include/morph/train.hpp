#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "morph/corpus.hpp"
#include "morph/evaluate.hpp"
#include "morph/model.hpp"

namespace morph {

enum class Mode { kMdcrf, kMdcrfPos, kMulti, kMultiPolyglot };

Mode parse_mode(std::string_view s);
std::string mode_name(Mode m);

struct TrainConfig {
  double learning_rate = 0.015;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  std::uint64_t seed = 13;
  std::optional<double> clip_norm;
  bool parallel_eval = true;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_accuracy = 0.0;
  double dev_f1_micro = 0.0;
  double best_dev_accuracy = 0.0;

  // epoch, train_loss, dev_acc, dev_f1_micro, best_dev_acc; tab separated
  std::string line() const;
  static std::string header();
};

struct TrainSummary {
  std::vector<EpochRecord> epochs;
  double best_dev_accuracy = 0.0;
  std::size_t best_epoch = 0;  // 0 when the starting parameters were never beaten
};

// Predicted analyses, in sentence order. Sentences are independent, so the
// parallel path returns exactly what the serial one does.
template <typename T>
std::vector<std::vector<MorphAnnotation>> predict_corpus(const Tagger<T>& tagger,
                                                         const std::vector<const Sentence*>& sentences,
                                                         bool parallel = true);

// Scores a tagger against the gold annotations it can predict (dimensions
// outside its schema are ignored).
template <typename T>
EvalReport evaluate_model(const Tagger<T>& tagger, const std::vector<const Sentence*>& sentences, bool parallel = true);

// Per-sentence SGD with a seeded shuffle each epoch and early stopping on dev
// exact match. The starting parameters count as a candidate, so the result
// is never worse on dev than the input model. The best parameters are
// restored before returning.
template <typename T>
TrainSummary fit(Tagger<T>& tagger, const std::vector<const Sentence*>& train, const std::vector<const Sentence*>& dev,
                 const TrainConfig& cfg, std::ostream* log = nullptr);

// Copies each tagger prediction into Token::pos.
template <typename T>
void assign_predicted_pos(const Tagger<T>& pos_tagger, std::vector<Sentence*>& sentences, bool parallel = true);
void assign_gold_pos(std::vector<Sentence*>& sentences);

struct TrainRequest {
  Mode mode = Mode::kMdcrf;
  bool with_pos = false;  // separate POS tagger for the multi modes
  bool gold_pos = false;  // analyzer reads gold POS while training
  bool ablate_language = false;  // multi modes without language embeddings or sentinels
  ModelConfig model;
  TrainConfig train;
  std::size_t min_count = 1;
};

struct TrainedSystem {
  std::optional<Tagger<float>> pos_tagger;
  std::optional<Tagger<float>> analyzer;
  FeatureDictionary dictionary;
  TrainSummary pos_summary;
  TrainSummary summary;

  bool uses_pos_tagger() const { return pos_tagger.has_value(); }
  // Fills Token::pos from the tagger when there is one.
  void prepare(std::vector<Sentence*>& sentences, bool parallel = true) const;
  std::vector<std::vector<std::string>> predict_tags(Corpus& corpus, bool parallel = true) const;
};

// The model configuration the request implies (language inputs for the
// multi modes, POS inputs when a tagger is trained, ...).
ModelConfig resolve_model_config(const TrainRequest& req);

// Trains the whole regime of a mode. `schema_sources` define the schema and
// vocabulary (all member corpora of a cluster); `train` is what SGD visits.
TrainedSystem train_system(Corpus& train, Corpus& dev, const std::vector<const Corpus*>& schema_sources,
                           const TrainRequest& req, const TypologyTable& typology, FeatureDictionary dictionary,
                           std::ostream* log = nullptr, std::ostream* pos_log = nullptr);

// Continues training on one member language. Target labels unknown to the
// model raise SchemaError listing them.
TrainedSystem finetune_system(TrainedSystem base, Corpus& train, Corpus& dev, const TrainConfig& cfg,
                              std::ostream* log = nullptr, std::ostream* pos_log = nullptr);

inline constexpr std::string_view kCheckpointFormat = "morphtag-checkpoint 1";

template <typename T>
void write_tagger(const std::filesystem::path& dir, const Tagger<T>& tagger, const FeatureDictionary& dictionary,
                  const TrainSummary& summary);

struct LoadedTagger {
  std::optional<Tagger<float>> tagger;
  FeatureDictionary dictionary;
  double best_dev_accuracy = 0.0;
  std::size_t best_epoch = 0;
};
LoadedTagger read_tagger(const std::filesystem::path& dir);

// Writes into a fresh sibling directory and renames it into place, so a
// failed save never leaves a partial checkpoint. An existing `dir` is a
// ConfigError unless `overwrite`.
void save_checkpoint(const std::filesystem::path& dir, const TrainedSystem& system, bool overwrite,
                     const std::vector<std::pair<std::string, std::string>>& extra_files = {});
TrainedSystem load_checkpoint(const std::filesystem::path& dir);

extern template std::vector<std::vector<MorphAnnotation>> predict_corpus<float>(const Tagger<float>&,
                                                                                const std::vector<const Sentence*>&, bool);
extern template std::vector<std::vector<MorphAnnotation>> predict_corpus<double>(const Tagger<double>&,
                                                                                 const std::vector<const Sentence*>&, bool);
extern template EvalReport evaluate_model<float>(const Tagger<float>&, const std::vector<const Sentence*>&, bool);
extern template EvalReport evaluate_model<double>(const Tagger<double>&, const std::vector<const Sentence*>&, bool);
extern template TrainSummary fit<float>(Tagger<float>&, const std::vector<const Sentence*>&,
                                        const std::vector<const Sentence*>&, const TrainConfig&, std::ostream*);
extern template TrainSummary fit<double>(Tagger<double>&, const std::vector<const Sentence*>&,
                                         const std::vector<const Sentence*>&, const TrainConfig&, std::ostream*);

std::vector<const Sentence*> sentence_view(const Corpus& corpus);
std::vector<Sentence*> sentence_refs(Corpus& corpus);

}  // namespace morph
