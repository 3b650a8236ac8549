#pragma once

#include "htlip/simulation.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace htlip::config {

/// Malformed config text, unknown keys or unparsable values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat sectioned text: `[section]` headers, `[[section]]` for repeated
/// tables, `key = value` lines, `#` comments. Values keep their raw text
/// (quotes stripped) and are converted on access.
struct Table {
  std::string section;
  std::map<std::string, std::string> values;
  int line = 0;
};

struct Document {
  std::vector<Table> tables;
  std::filesystem::path base_dir;  // sample_file paths resolve against this

  const Table* find(const std::string& section) const;
  Table& get_or_add(const std::string& section);
};

Document parse(const std::string& text);
Document load(const std::filesystem::path& path);

/// `section.key=value` or `key=value` when the key name is unique across
/// sections. Rejects unknown keys by name.
void apply_override(Document& doc, const std::string& assignment);

struct MonteCarloConfig {
  std::size_t trials = 100;
  RandomizationSpec randomization;
};

/// Builds and validates nothing beyond key/type checks; call
/// Scenario::validate for model validity.
Scenario scenario_from(const Document& doc);
MonteCarloConfig monte_carlo_from(const Document& doc);

/// "per_tick" | "per_step" | "fixed:k1,k2"
GainMode parse_gain_mode(const std::string& text);

}  // namespace htlip::config
