// Apache License, Version 2.0, refer to LICENSE.txt

#include "pex/dataset.hpp"

#include <fmt/format.h>
#include <fstream>
#include <istream>

#include "pex/error.hpp"

namespace pex {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

SpeciesEncoder::SpeciesEncoder(std::size_t features) : ids_(features), tokens_(features) {}

SpeciesId SpeciesEncoder::encode(std::size_t feature, std::string_view token) {
  auto& ids = ids_.at(feature);
  auto it = ids.find(std::string(token));
  if (it != ids.end()) return it->second;
  auto& tokens = tokens_[feature];
  tokens.emplace_back(token);
  const SpeciesId id = tokens.size();
  ids.emplace(tokens.back(), id);
  return id;
}

std::optional<SpeciesId> SpeciesEncoder::find(std::size_t feature, std::string_view token) const {
  const auto& ids = ids_.at(feature);
  auto it = ids.find(std::string(token));
  if (it == ids.end()) return std::nullopt;
  return it->second;
}

const std::string& SpeciesEncoder::decode(std::size_t feature, SpeciesId id) const {
  const auto& tokens = tokens_.at(feature);
  if (id == 0 || id > tokens.size()) {
    throw DomainError(fmt::format("unknown species id {} for feature {}", id, feature));
  }
  return tokens[id - 1];
}

RawDataset parse_csv(std::istream& in) {
  RawDataset out;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (!have_header) {
      if (fields.size() < 2 || fields[0] != "class") {
        throw ParseError(line_no, "header must be `class,f1[,f2,...]`");
      }
      out.feature_names.assign(fields.begin() + 1, fields.end());
      have_header = true;
      continue;
    }
    const std::size_t d = out.feature_names.size();
    if (fields.size() != d + 1) {
      throw ParseError(line_no,
                       fmt::format("expected {} feature fields, found {}", d, fields.size() - 1));
    }
    for (std::size_t f = 1; f < fields.size(); ++f) {
      if (fields[f].empty()) {
        throw ParseError(line_no, fmt::format("empty value for feature `{}`",
                                              out.feature_names[f - 1]));
      }
    }
    RawRow row;
    row.line = line_no;
    row.label = std::move(fields[0]);
    row.features.assign(std::make_move_iterator(fields.begin() + 1),
                        std::make_move_iterator(fields.end()));
    out.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(line_no, "missing header");
  return out;
}

Dataset load_dataset(std::istream& in) {
  RawDataset raw = parse_csv(in);
  const std::size_t d = raw.feature_names.size();

  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> class_index;
  for (const RawRow& row : raw.rows) {
    if (row.label.empty()) continue;
    if (class_index.emplace(row.label, labels.size()).second) labels.push_back(row.label);
  }
  if (labels.empty()) throw EmptyTraining("dataset has no labeled training rows");

  Dataset out{LabeledDataset(labels.size(), d), TestSet(d), SpeciesEncoder(d), labels,
              raw.feature_names};
  std::vector<SpeciesId> item(d);
  for (const RawRow& row : raw.rows) {
    if (row.label.empty()) continue;
    for (std::size_t f = 0; f < d; ++f) item[f] = out.encoder.encode(f, row.features[f]);
    out.train.add(class_index.at(row.label), item);
  }
  for (const RawRow& row : raw.rows) {
    if (!row.label.empty()) continue;
    for (std::size_t f = 0; f < d; ++f) item[f] = out.encoder.encode(f, row.features[f]);
    out.test.add(item);
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, fmt::format("cannot open {}", path.string()));
  return load_dataset(in);
}

}  // namespace pex
