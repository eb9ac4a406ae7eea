// Batch entry point: config parsing, demo / reduce / verify pipelines and
// result emission.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nmzkit/demos.hpp"
#include "nmzkit/nmz.hpp"

namespace nmzkit::cli {

enum class Mode { Demo, Reduce, Verify };
enum class Format { Csv, Json };

using KeyValues = std::map<std::string, std::string>;

// Parses `section.key = value` lines. Blank lines and `#` comments are
// ignored; duplicate or malformed keys raise ConfigParse.
KeyValues parse_config_text(const std::string& text, const std::string& source = "<config>");
KeyValues read_config_file(const std::string& path);

struct KeySpec {
  std::string key;
  std::string default_value;  // empty: no default
  std::string description;
};

// The single table of recognized keys and their defaults.
const std::vector<KeySpec>& config_keys();

struct RunConfig {
  Mode mode = Mode::Demo;
  std::string demo = "su2-observable";
  demos::DemoParams params;
  std::string out_path;
  Format format = Format::Csv;
  std::size_t mc_samples = 100000;
  int verify_trials = 200;

  // reduce mode
  int dA = 2, dB = 2;
  std::optional<MatrixC> H, rhoB, sigma0, rho0;
};

// Validates values; requires `version = 1` when requireVersion is set.
RunConfig build_config(const KeyValues& kv, bool requireVersion);

MatrixC parse_matrix(const std::string& text);
std::string format_double(double v);

void emit_csv(const demos::Table& table, const std::string& path);
void emit_csv(const nmz::GLESolution& solution, const std::string& path);

// Returns 0 on success, 1 when a declared tolerance is violated.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// argv handling; returns the process exit code.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace nmzkit::cli
