// Apache License, Version 2.0, refer to LICENSE.txt

#include "pex/config.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <istream>
#include <vector>

#include "pex/error.hpp"

namespace pex {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw DomainError(fmt::format("invalid value `{}` for `{}`", text, key));
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    out.push_back(parse_number<T>(key, text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  throw DomainError(fmt::format("invalid boolean `{}` for `{}`", text, key));
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    view = trim(view.substr(0, view.find('#')));
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
    const std::string_view key = trim(view.substr(0, eq));
    if (key.empty()) throw ParseError(line_no, "empty key");
    out.set(std::string(key), std::string(trim(view.substr(eq + 1))));
  }
  return out;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, fmt::format("cannot open {}", path.string()));
  return parse(in);
}

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

ConvergenceConfig convergence_config_from(const KeyValueConfig& kv, ConvergenceConfig base) {
  ConvergenceConfig c = std::move(base);
  for (const auto& [key, value] : kv.entries()) {
    if (key == "k") {
      c.k = parse_number<std::size_t>(key, value);
    } else if (key == "n") {
      c.n = parse_number<std::size_t>(key, value);
    } else if (key == "psi") {
      c.psi_true = c.psi_model = parse_number<double>(key, value);
    } else if (key == "psi_true") {
      c.psi_true = parse_number<double>(key, value);
    } else if (key == "psi_model") {
      c.psi_model = parse_number<double>(key, value);
    } else if (key == "m_grid") {
      c.m_grid = parse_list<std::uint64_t>(key, value);
    } else if (key == "replicates" || key == "reps") {
      c.replicates = parse_number<std::size_t>(key, value);
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "generator") {
      if (value == "crp") {
        c.generator = Generator::crp;
      } else if (value == "paintbox") {
        c.generator = Generator::paintbox;
      } else {
        throw DomainError(fmt::format("unknown generator `{}`", value));
      }
    } else if (key == "theta") {
      c.theta = parse_number<double>(key, value);
    } else if (key == "class_shares") {
      c.class_shares = parse_list<double>(key, value);
    } else if (key == "m") {
      c.m = parse_number<std::uint64_t>(key, value);
    } else if (key == "n_grid") {
      c.n_grid = parse_list<std::uint64_t>(key, value);
    } else if (key == "argmax") {
      c.report_argmax = parse_bool(key, value);
    } else if (key == "workers") {
      c.workers = parse_number<unsigned>(key, value);
    } else {
      throw DomainError(fmt::format("unknown configuration key `{}`", key));
    }
  }
  return c;
}

}  // namespace pex
