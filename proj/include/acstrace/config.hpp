#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "acstrace/mc.hpp"

namespace acstrace {

struct OutputSpec {
  std::string path = "results.csv";
  enum class Format { csv, json } format = Format::csv;
  bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
  OutputSpec output;
  int verbosity = 1;
  std::optional<std::int64_t> replicates_override;
  std::vector<Scenario> scenarios;
  bool operator==(const RunConfig&) const = default;
};

// Parses the documented JSON schema; unknown keys are rejected with their
// full key path, and every scenario is validated.
RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& config);

// Runs every scenario and writes the results file. Returns 0 on success;
// on a scenario failure the partial results carry an INCOMPLETE marker and
// the exit status is nonzero.
int run(const RunConfig& config, std::ostream& log, int threads = 0);

void write_csv(const std::vector<McSummary>& rows, std::ostream& os);
void write_json(const std::vector<McSummary>& rows, std::ostream& os);

}  // namespace acstrace
