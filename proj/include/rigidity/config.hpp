#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rigidity/action_angle.hpp"
#include "rigidity/potentials.hpp"

namespace rigidity::config {

using nlohmann::json;

// Parses the TOML subset used by scenario files: [table] and [[array.of.tables]]
// headers, dotted and quoted keys, basic and literal strings, integers, floats
// (inf/nan included), booleans, multi-line arrays, inline tables and comments.
// Errors raise ConfigError with the line number.
json parse_toml(std::string_view text);

// .json files are parsed as JSON, anything else as TOML.
json load_file(const std::filesystem::path& path);

// Typed read access to one table of a config document. Every error names the
// full dotted field path.
class Section {
 public:
  Section(const json& node, std::string path);

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const;
  std::string field(const std::string& key) const;
  const json& raw(const std::string& key) const;

  Section table(const std::string& key) const;
  std::optional<Section> optional_table(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  double positive(const std::string& key) const;
  double positive(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<int> integers(const std::string& key) const;

 private:
  const json* node_;
  std::string path_;
};

// A potential given as "pendulum", "free", or {modes = [[k, a, b], ...]} meaning
// sum a cos(2 pi k x) + b sin(2 pi k x); shifted so its minimum is 0.
PeriodicPotential1D potential_from(const json& value, const std::string& field);

// [system] with mu = [...] (one entry per axis) and potential = "<name>" or a
// per-axis array. mu_i = 0 gives the free rotor.
std::vector<MechanicalSystem1D> systems_from(const Section& root);
std::vector<PeriodicPotential1D> potentials_from(const Section& root);

// [perturbation] with modes = [{k = [...], cos = a, sin = b}, ...]; absent means U = 0.
TorusPotential perturbation_from(const Section& root, int dimension);

}  // namespace rigidity::config
