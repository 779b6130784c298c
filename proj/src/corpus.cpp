#include "morph/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "morph/error.hpp"
#include "morph/num/random.hpp"
#include "morph/text.hpp"

namespace morph {

namespace fs = std::filesystem;

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

std::vector<MorphAnnotation> Corpus::annotations() const {
  std::vector<MorphAnnotation> out;
  out.reserve(token_count());
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) out.push_back(t.annotation);
  }
  return out;
}

namespace {

constexpr std::size_t kFormColumn = 1;
constexpr std::size_t kFeatsColumn = 5;

void decompose_token(Token& token, const ReadOptions& opts, Corpus& corpus) {
  token.annotation.clear();
  token.unmapped.clear();
  if (opts.dictionary) {
    auto d = decompose_tagset(token.raw_tags, *opts.dictionary, opts.policy);
    token.annotation = std::move(d.values);
    token.unmapped = std::move(d.unmapped);
    corpus.unmapped += token.unmapped.size();
  } else {
    for (auto& v : tagset_values(token.raw_tags)) token.annotation.emplace(v, v);
  }
}

}  // namespace

Corpus read_conllu(const fs::path& path, std::string language, const ReadOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_conllu(in, path.string(), std::move(language), opts);
}

Corpus parse_conllu(std::istream& in, std::string_view source, std::string language, const ReadOptions& opts) {
  Corpus corpus;
  corpus.language = language;
  Sentence current;
  current.language = language;
  std::size_t dropped_blocks = 0;

  auto flush = [&] {
    if (current.tokens.empty()) {
      if (!current.lines.empty()) ++dropped_blocks;
    } else {
      corpus.sentences.push_back(std::move(current));
    }
    current = Sentence{};
    current.language = language;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      current.lines.push_back({line, -1});
      continue;
    }
    auto cols = text::split(line, '\t');
    if (cols.size() != 10) {
      throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": expected 10 columns, found " +
                       std::to_string(cols.size()));
    }
    if (cols[0].find_first_of("-.") != std::string::npos) {
      current.lines.push_back({line, -1});
      continue;
    }
    if (cols[kFormColumn].empty()) {
      throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": empty FORM");
    }
    Token token;
    token.form = cols[kFormColumn];
    token.chars = text::utf8_decode(token.form);
    token.raw_tags = cols[kFeatsColumn];
    try {
      decompose_token(token, opts, corpus);
    } catch (const SchemaError& e) {
      throw SchemaError(std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
    }
    token.columns = std::move(cols);
    current.lines.push_back({line, static_cast<std::ptrdiff_t>(current.tokens.size())});
    current.tokens.push_back(std::move(token));
  }
  flush();
  if (corpus.sentences.empty()) corpus.warnings.push_back(std::string(source) + ": empty corpus");
  if (dropped_blocks > 0) {
    corpus.warnings.push_back(std::string(source) + ": skipped " + std::to_string(dropped_blocks) +
                              " blocks without tokens");
  }
  if (corpus.unmapped > 0) {
    corpus.warnings.push_back(std::string(source) + ": dropped " + std::to_string(corpus.unmapped) +
                              " unmapped tag values");
  }
  return corpus;
}

void decompose_corpus(Corpus& corpus, const FeatureDictionary& dict, UnmappedPolicy policy) {
  ReadOptions opts{&dict, policy};
  corpus.unmapped = 0;
  for (auto& s : corpus.sentences) {
    for (auto& t : s.tokens) decompose_token(t, opts, corpus);
  }
}

void write_conllu(std::ostream& out, const Corpus& corpus, const std::vector<std::vector<std::string>>* tags) {
  if (tags && tags->size() != corpus.sentences.size()) {
    throw AlignmentError("tag rows for " + std::to_string(tags->size()) + " sentences, corpus has " +
                         std::to_string(corpus.sentences.size()));
  }
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    const auto& sent = corpus.sentences[s];
    if (tags && (*tags)[s].size() != sent.tokens.size()) {
      throw AlignmentError("sentence " + std::to_string(s) + ": " + std::to_string((*tags)[s].size()) +
                           " tags for " + std::to_string(sent.tokens.size()) + " tokens");
    }
    auto token_line = [&](std::size_t t) {
      const auto& tok = sent.tokens[t];
      std::vector<std::string> cols = tok.columns;
      if (cols.size() != 10) {
        cols.assign(10, "_");
        cols[0] = std::to_string(t + 1);
        cols[kFormColumn] = tok.form;
        cols[kFeatsColumn] = tok.raw_tags.empty() ? "_" : tok.raw_tags;
      }
      if (tags) cols[kFeatsColumn] = (*tags)[s][t];
      return text::join(cols, "\t");
    };
    if (sent.lines.empty()) {
      for (std::size_t t = 0; t < sent.tokens.size(); ++t) out << token_line(t) << '\n';
    } else {
      for (const auto& l : sent.lines) {
        if (l.token < 0) {
          out << l.text << '\n';
        } else {
          out << token_line(static_cast<std::size_t>(l.token)) << '\n';
        }
      }
    }
    out << '\n';
  }
}

std::string sentinel_marker(std::string_view language) { return "<" + std::string(language) + ">"; }

Vocabulary Vocabulary::build(const std::vector<Sentence>& sentences, std::size_t min_count) {
  std::vector<const Sentence*> ptrs;
  ptrs.reserve(sentences.size());
  for (const auto& s : sentences) ptrs.push_back(&s);
  return build(ptrs, min_count);
}

Vocabulary Vocabulary::build(const std::vector<const Sentence*>& sentences, std::size_t min_count) {
  if (sentences.empty()) throw ContractError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  std::set<char32_t> chars;
  std::set<std::string> languages;
  for (const auto* s : sentences) {
    languages.insert(s->language);
    for (const auto& t : s->tokens) {
      ++counts[t.form];
      chars.insert(t.chars.begin(), t.chars.end());
    }
  }
  Vocabulary v;
  v.words_ = {"<pad>", "<unk>"};
  v.chars_ = {0, 0xFFFD};
  for (const auto& lang : languages) {
    v.languages_.push_back(lang);
    v.words_.push_back(sentinel_marker(lang));
    for (char32_t c : text::utf8_decode(sentinel_marker(lang))) chars.insert(c);
  }
  for (const auto& [w, n] : counts) {
    if (n >= min_count) v.words_.push_back(w);
  }
  chars.erase(0);
  chars.erase(0xFFFD);
  v.chars_.insert(v.chars_.end(), chars.begin(), chars.end());
  v.index();
  return v;
}

void Vocabulary::index() {
  word_index_.clear();
  char_index_.clear();
  language_index_.clear();
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!word_index_.emplace(words_[i], i).second) throw LoadError("duplicate word " + words_[i]);
  }
  for (std::size_t i = 0; i < chars_.size(); ++i) char_index_.emplace(chars_[i], i);
  for (std::size_t i = 0; i < languages_.size(); ++i) language_index_.emplace(languages_[i], i);
}

std::size_t Vocabulary::word(std::string_view form) const {
  auto it = word_index_.find(form);
  if (it == word_index_.end() || it->second == kPad) return kUnk;
  return it->second;
}

std::size_t Vocabulary::character(char32_t c) const {
  auto it = char_index_.find(c);
  if (it == char_index_.end() || it->second == kPad) return kUnk;
  return it->second;
}

std::optional<std::size_t> Vocabulary::language(std::string_view id) const {
  auto it = language_index_.find(id);
  if (it == language_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::sentinel(std::string_view language) const {
  if (!this->language(language)) throw ContractError("language " + std::string(language) + " is not in the vocabulary");
  return word(sentinel_marker(language));
}

std::string Vocabulary::serialize() const {
  std::ostringstream out;
  out << "languages\t" << languages_.size() << '\n';
  for (const auto& l : languages_) out << l << '\n';
  out << "chars\t" << chars_.size() << '\n';
  for (char32_t c : chars_) out << static_cast<std::uint32_t>(c) << '\n';
  out << "words\t" << words_.size() << '\n';
  for (const auto& w : words_) out << w << '\n';
  return out.str();
}

Vocabulary Vocabulary::deserialize(std::istream& in) {
  auto section = [&in](std::string_view name) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("vocabulary: missing section " + std::string(name));
    auto cols = text::split(line, '\t');
    if (cols.size() != 2 || cols[0] != name) throw ParseError("vocabulary: expected section " + std::string(name));
    return static_cast<std::size_t>(text::parse_int(cols[1]));
  };
  auto next = [&in] {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("vocabulary: unexpected end of input");
    return line;
  };
  Vocabulary v;
  for (std::size_t i = 0, n = section("languages"); i < n; ++i) v.languages_.push_back(next());
  for (std::size_t i = 0, n = section("chars"); i < n; ++i) v.chars_.push_back(static_cast<char32_t>(text::parse_int(next())));
  for (std::size_t i = 0, n = section("words"); i < n; ++i) v.words_.push_back(next());
  if (v.words_.size() < 2 || v.chars_.size() < 2) throw ParseError("vocabulary: reserved entries missing");
  v.index();
  return v;
}

std::vector<LanguageCluster> parse_cluster_config(std::istream& in, std::string_view source, const fs::path& root) {
  std::vector<LanguageCluster> clusters;
  std::set<std::string> names;
  std::string line;
  std::size_t lineno = 0;
  auto where = [&] { return std::string(source) + ":" + std::to_string(lineno) + ": "; };
  while (std::getline(in, line)) {
    ++lineno;
    auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3) throw ParseError(where() + "malformed stanza header");
      std::string name(text::trim(body.substr(1, body.size() - 2)));
      if (!names.insert(name).second) throw ClusterError(where() + "duplicate cluster " + name);
      clusters.push_back({name, {}});
      continue;
    }
    if (clusters.empty()) throw ParseError(where() + "member line outside a [cluster] stanza");
    std::istringstream fields{std::string(body)};
    std::string lang, path, extra;
    fields >> lang >> path;
    if (lang.empty() || path.empty() || (fields >> extra)) throw ParseError(where() + "expected 'language path'");
    fs::path p(path);
    if (p.is_relative()) p = root / p;
    clusters.back().members.push_back({lang, p, 0});
  }
  for (const auto& c : clusters) {
    if (c.members.empty()) throw ClusterError("cluster " + c.name + " has no members");
  }
  return clusters;
}

std::vector<LanguageCluster> load_cluster_config(const fs::path& path, std::optional<fs::path> root) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cluster config " + path.string());
  return parse_cluster_config(in, path.string(), root.value_or(path.parent_path()));
}

const LanguageCluster& find_cluster(const std::vector<LanguageCluster>& clusters, std::string_view name) {
  for (const auto& c : clusters) {
    if (c.name == name) return c;
  }
  throw LookupError("no cluster named " + std::string(name));
}

fs::path resolve_split(const fs::path& path, Split split) {
  std::error_code ec;
  if (!fs::is_directory(path, ec)) {
    if (split == Split::kTrain) return path;
    throw IoError(path.string() + " is a file; dev and test splits need a treebank directory");
  }
  const std::string key = split == Split::kTrain ? "train" : split == Split::kDev ? "dev" : "test";
  std::vector<fs::path> found;
  for (const auto& entry : fs::directory_iterator(path)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && entry.path().extension() == ".conllu" && name.find(key) != std::string::npos) {
      found.push_back(entry.path());
    }
  }
  if (found.empty()) throw IoError("no *" + key + "*.conllu file in " + path.string());
  std::sort(found.begin(), found.end(), [](const fs::path& a, const fs::path& b) {
    const bool ca = a.filename().string().find("covered") != std::string::npos;
    const bool cb = b.filename().string().find("covered") != std::string::npos;
    if (ca != cb) return !ca;
    return a < b;
  });
  return found.front();
}

Corpus prepare_cluster(const LanguageCluster& cluster, const std::vector<Corpus>& corpora, std::size_t cap,
                       std::uint64_t seed, ClusterPlan* plan) {
  if (cluster.members.empty()) throw ClusterError("cluster " + cluster.name + " has no members");
  if (cap == 0) throw ConfigError("cluster cap must be positive");
  std::vector<const Corpus*> members;
  for (const auto& m : cluster.members) {
    auto it = std::find_if(corpora.begin(), corpora.end(), [&](const Corpus& c) { return c.language == m.language; });
    if (it == corpora.end() || it->sentences.empty()) {
      throw ClusterError("cluster " + cluster.name + ": no training sentences for language " + m.language);
    }
    members.push_back(&*it);
  }
  std::size_t largest = 0;
  for (const auto* c : members) largest = std::max(largest, c->sentences.size());
  const std::size_t target = std::min(cap, largest);

  num::Rng rng(seed);
  ClusterPlan local;
  local.target = target;
  Corpus out;
  out.language = cluster.name;
  auto take = [&](const Sentence& s) {
    Sentence copy = s;
    copy.sentinels = true;
    out.sentences.push_back(std::move(copy));
  };
  auto sample = [&](const Corpus& c, std::size_t k) {
    std::vector<std::size_t> idx(c.sentences.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.below(idx.size() - i);
      std::swap(idx[i], idx[j]);
      take(c.sentences[idx[i]]);
    }
  };
  for (const auto* c : members) {
    const std::size_t n = c->sentences.size();
    const std::size_t copies = n >= target ? 0 : target / n;
    const std::size_t rest = n >= target ? target : target % n;
    for (std::size_t r = 0; r < copies; ++r) {
      for (const auto& s : c->sentences) take(s);
    }
    sample(*c, rest);
    local.full_copies[c->language] = copies;
    local.sampled[c->language] = rest;
    out.warnings.insert(out.warnings.end(), c->warnings.begin(), c->warnings.end());
    out.unmapped += c->unmapped;
  }
  rng.shuffle(std::span<Sentence>(out.sentences));
  if (plan) *plan = std::move(local);
  return out;
}

}  // namespace morph
