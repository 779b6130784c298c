#include "morph/schema.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "morph/error.hpp"
#include "morph/text.hpp"

namespace morph {

FeatureDictionary FeatureDictionary::load(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dictionary " + path.string());
  return parse(in, path.string(), warnings);
}

FeatureDictionary FeatureDictionary::parse(std::istream& in, std::string_view source,
                                           std::vector<std::string>* warnings) {
  FeatureDictionary dict;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto cols = text::split(body, '\t');
    if (cols.size() != 2) {
      throw LoadError(std::string(source) + ":" + std::to_string(lineno) + ": expected 'value<TAB>dimension'");
    }
    auto value = std::string(text::trim(cols[0]));
    auto dim = std::string(text::trim(cols[1]));
    if (value.empty() || dim.empty()) {
      throw LoadError(std::string(source) + ":" + std::to_string(lineno) + ": empty value or dimension");
    }
    dict.add(std::move(value), std::move(dim), std::string(source) + ":" + std::to_string(lineno));
  }
  if (dict.empty() && warnings) warnings->push_back("dictionary " + std::string(source) + " is empty");
  return dict;
}

void FeatureDictionary::add(std::string value, std::string dimension, std::string source) {
  auto it = entries_.find(value);
  if (it != entries_.end()) {
    if (it->second.dimension != dimension) {
      throw LoadError("value " + value + " maps to " + it->second.dimension + " at " + it->second.source +
                      " and to " + dimension + " at " + source);
    }
    return;
  }
  entries_.emplace(std::move(value), Entry{std::move(dimension), std::move(source)});
}

std::optional<std::string> FeatureDictionary::dimension_of(std::string_view value) const {
  if (auto it = entries_.find(value); it != entries_.end()) return it->second.dimension;
  std::string_view inner = value;
  if (inner.size() >= 2 && inner.front() == '{' && inner.back() == '}') inner = inner.substr(1, inner.size() - 2);
  if (inner.find('/') == std::string_view::npos) {
    if (inner.size() == value.size()) return std::nullopt;
    if (auto it = entries_.find(inner); it != entries_.end()) return it->second.dimension;
    return std::nullopt;
  }
  std::optional<std::string> dim;
  for (const auto& part : text::split(inner, '/')) {
    auto it = entries_.find(part);
    if (it == entries_.end()) return std::nullopt;
    if (dim && *dim != it->second.dimension) return std::nullopt;
    dim = it->second.dimension;
  }
  return dim;
}

std::map<std::string, std::size_t> FeatureDictionary::values_per_dimension() const {
  std::map<std::string, std::size_t> out;
  for (const auto& [value, entry] : entries_) ++out[entry.dimension];
  return out;
}

std::vector<std::string> tagset_values(std::string_view raw) {
  std::vector<std::string> out;
  auto body = text::trim(raw);
  if (body.empty() || body == kNullValue) return out;
  for (auto& part : text::split(body, ';')) {
    auto v = text::trim(part);
    if (v.empty() || v == kNullValue) continue;
    out.emplace_back(v);
  }
  return out;
}

Decomposition decompose_tagset(std::string_view raw, const FeatureDictionary& dict, UnmappedPolicy policy) {
  std::map<std::string, std::set<std::string>> grouped;
  Decomposition out;
  for (auto& value : tagset_values(raw)) {
    auto dim = dict.dimension_of(value);
    if (!dim) {
      if (policy == UnmappedPolicy::kStrict) {
        throw SchemaError("unmapped value '" + value + "' in tagset '" + std::string(raw) + "'");
      }
      out.unmapped.push_back(std::move(value));
      continue;
    }
    grouped[*dim].insert(std::move(value));
  }
  for (auto& [dim, values] : grouped) {
    out.values.emplace(dim, text::join(std::vector<std::string>(values.begin(), values.end()), "+"));
  }
  return out;
}

namespace {

std::vector<std::string> ordered_dimensions(std::vector<std::string> dims) {
  std::sort(dims.begin(), dims.end(), [](const std::string& a, const std::string& b) {
    const bool pa = a == kPosDimension;
    const bool pb = b == kPosDimension;
    if (pa != pb) return pa;
    return a < b;
  });
  return dims;
}

}  // namespace

FeatureSchema FeatureSchema::from_label_spaces(const std::map<std::string, std::vector<std::string>>& spaces) {
  std::map<std::string, std::set<std::string>> sets;
  sets[std::string(kPosDimension)];
  for (const auto& [dim, values] : spaces) {
    if (dim.empty()) throw SchemaError("empty dimension name");
    auto& s = sets[dim];
    for (const auto& v : values) {
      if (v.empty()) throw SchemaError("empty label in dimension " + dim);
      s.insert(v);
    }
  }
  FeatureSchema schema;
  std::vector<std::string> dims;
  for (const auto& [dim, s] : sets) dims.push_back(dim);
  schema.dimensions_ = ordered_dimensions(std::move(dims));
  for (const auto& dim : schema.dimensions_) {
    auto s = sets.at(dim);
    s.insert(std::string(kNullValue));
    schema.labels_.emplace_back(s.begin(), s.end());
  }
  schema.index();
  return schema;
}

FeatureSchema FeatureSchema::build(const std::vector<MorphAnnotation>& annotations) {
  if (annotations.empty()) throw SchemaError("cannot build a schema from an empty corpus");
  std::map<std::string, std::vector<std::string>> spaces;
  for (const auto& a : annotations) {
    for (const auto& [dim, value] : a) spaces[dim].push_back(value);
  }
  return from_label_spaces(spaces);
}

void FeatureSchema::index() {
  dim_index_.clear();
  label_index_.assign(dimensions_.size(), {});
  for (std::size_t d = 0; d < dimensions_.size(); ++d) {
    dim_index_.emplace(dimensions_[d], d);
    for (std::size_t l = 0; l < labels_[d].size(); ++l) label_index_[d].emplace(labels_[d][l], l);
  }
}

const std::vector<std::string>& FeatureSchema::labels(std::string_view dimension) const {
  auto d = dimension_index(dimension);
  if (!d) throw LookupError("unknown dimension " + std::string(dimension));
  return labels_[*d];
}

std::optional<std::size_t> FeatureSchema::dimension_index(std::string_view dimension) const {
  auto it = dim_index_.find(dimension);
  if (it == dim_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> FeatureSchema::label_index(std::string_view dimension, std::string_view value) const {
  auto d = dimension_index(dimension);
  if (!d) return std::nullopt;
  auto it = label_index_[*d].find(value);
  if (it == label_index_[*d].end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureSchema::null_index(std::string_view dimension) const {
  auto idx = label_index(dimension, kNullValue);
  if (!idx) throw LookupError("unknown dimension " + std::string(dimension));
  return *idx;
}

MorphAnnotation FeatureSchema::extend(const MorphAnnotation& partial) const {
  for (const auto& [dim, value] : partial) {
    if (!dimension_index(dim)) throw ContractError("dimension " + dim + " is not in the schema");
    if (!contains(dim, value)) throw ContractError("value " + value + " is not in the label space of " + dim);
  }
  MorphAnnotation total;
  for (const auto& dim : dimensions_) {
    auto it = partial.find(dim);
    total.emplace(dim, it == partial.end() ? std::string(kNullValue) : it->second);
  }
  return total;
}

std::string FeatureSchema::compose(const MorphAnnotation& total) const {
  if (total.size() != dimensions_.size()) {
    throw ContractError("composition needs a value for each of the " + std::to_string(dimensions_.size()) +
                        " schema dimensions, got " + std::to_string(total.size()));
  }
  std::vector<std::string> parts;
  for (const auto& dim : dimensions_) {
    auto it = total.find(dim);
    if (it == total.end()) throw ContractError("missing dimension " + dim);
    if (!contains(dim, it->second)) {
      throw ContractError("value " + it->second + " is not in the label space of " + dim);
    }
    if (it->second == kNullValue) continue;
    for (auto& v : text::split(it->second, '+')) parts.push_back(std::move(v));
  }
  if (parts.empty()) return std::string(kNullValue);
  return text::join(parts, ";");
}

FeatureSchema FeatureSchema::merged_with(const FeatureSchema& other) const {
  std::map<std::string, std::vector<std::string>> spaces;
  for (std::size_t d = 0; d < dimensions_.size(); ++d) spaces[dimensions_[d]] = labels_[d];
  for (std::size_t d = 0; d < other.dimensions_.size(); ++d) {
    auto& s = spaces[other.dimensions_[d]];
    s.insert(s.end(), other.labels_[d].begin(), other.labels_[d].end());
  }
  return from_label_spaces(spaces);
}

std::vector<std::string> FeatureSchema::novel_labels(const FeatureSchema& other) const {
  std::vector<std::string> out;
  for (std::size_t d = 0; d < other.dimensions_.size(); ++d) {
    for (const auto& v : other.labels_[d]) {
      if (!contains(other.dimensions_[d], v)) out.push_back(other.dimensions_[d] + "=" + v);
    }
  }
  return out;
}

std::string FeatureSchema::serialize() const {
  std::ostringstream out;
  out << "dimensions\t" << dimensions_.size() << '\n';
  for (std::size_t d = 0; d < dimensions_.size(); ++d) {
    out << "dimension\t" << dimensions_[d] << '\t' << labels_[d].size() << '\n';
    for (const auto& v : labels_[d]) out << v << '\n';
  }
  return out.str();
}

FeatureSchema FeatureSchema::deserialize(std::istream& in) {
  auto next = [&in](std::string_view what) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("schema: unexpected end of input, expected " + std::string(what));
    return line;
  };
  auto header = text::split(next("dimensions header"), '\t');
  if (header.size() != 2 || header[0] != "dimensions") throw ParseError("schema: malformed dimensions header");
  const auto count = static_cast<std::size_t>(text::parse_int(header[1]));
  std::map<std::string, std::vector<std::string>> spaces;
  std::vector<std::string> order;
  for (std::size_t d = 0; d < count; ++d) {
    auto cols = text::split(next("dimension header"), '\t');
    if (cols.size() != 3 || cols[0] != "dimension") throw ParseError("schema: malformed dimension header");
    const auto k = static_cast<std::size_t>(text::parse_int(cols[2]));
    auto& values = spaces[cols[1]];
    order.push_back(cols[1]);
    for (std::size_t i = 0; i < k; ++i) values.push_back(next("label"));
  }
  auto schema = from_label_spaces(spaces);
  if (schema.dimensions_ != order) throw ParseError("schema: dimensions are not in canonical order");
  return schema;
}

}  // namespace morph
