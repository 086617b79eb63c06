// Apache License, Version 2.0, refer to LICENSE.txt

// CSV ingestion. The header is `class,f1[,f2,...]`; rows with an empty class
// field are test items, kept in file order. Feature tokens are encoded per
// feature in order of first appearance starting at 1, training rows first,
// so tokens that only occur in test rows receive fresh ids.

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pex/classifiers.hpp"

namespace pex {

class SpeciesEncoder {
 public:
  explicit SpeciesEncoder(std::size_t features);

  SpeciesId encode(std::size_t feature, std::string_view token);
  std::optional<SpeciesId> find(std::size_t feature, std::string_view token) const;
  const std::string& decode(std::size_t feature, SpeciesId id) const;

  std::size_t features() const noexcept { return tokens_.size(); }
  std::size_t species(std::size_t feature) const { return tokens_.at(feature).size(); }

 private:
  std::vector<std::unordered_map<std::string, SpeciesId>> ids_;
  std::vector<std::vector<std::string>> tokens_;  // id - 1 -> token
};

struct RawRow {
  std::size_t line = 0;
  std::string label;  // empty for test rows
  std::vector<std::string> features;
};

struct RawDataset {
  std::vector<std::string> feature_names;
  std::vector<RawRow> rows;
};

// Throws ParseError naming the offending line.
RawDataset parse_csv(std::istream& in);

struct Dataset {
  LabeledDataset train;
  TestSet test;
  SpeciesEncoder encoder;
  std::vector<std::string> class_labels;  // class index -> raw label
  std::vector<std::string> feature_names;
};

// Throws ParseError or EmptyTraining.
Dataset load_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace pex
