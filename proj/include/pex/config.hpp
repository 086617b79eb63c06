// Apache License, Version 2.0, refer to LICENSE.txt

// Flat `key=value` configuration files; `#` starts a comment.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "pex/harness.hpp"

namespace pex {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::filesystem::path& path);

  std::optional<std::string> get(std::string_view key) const;
  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  const std::map<std::string, std::string, std::less<>>& entries() const noexcept {
    return values_;
  }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

// Keys: k, n, psi (sets both psi_true and psi_model), psi_true, psi_model,
// m_grid, replicates, seed, generator (crp|paintbox), theta, class_shares,
// m, n_grid, argmax, workers. Lists are comma separated. Unknown keys and
// malformed values throw DomainError.
ConvergenceConfig convergence_config_from(const KeyValueConfig& kv,
                                          ConvergenceConfig base = {});

}  // namespace pex
