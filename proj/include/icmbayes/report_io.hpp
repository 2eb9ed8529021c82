#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "icmbayes/experiment.hpp"

namespace icmbayes {

// Malformed invocation or config document (bad key, unparseable value).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem failure, carries path context in the message.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExperimentConfig default_config(ExperimentMode mode);

// Flat JSON object plus key=value overrides (applied last) on top of the
// mode's defaults. Unknown keys are usage errors; invariant violations are
// std::invalid_argument naming the field.
ExperimentConfig parse_config(ExperimentMode mode,
                              const std::optional<std::string>& file_json,
                              const std::vector<std::string>& overrides);

// Unsigned decimal or 0x-prefixed hex.
std::uint64_t parse_seed(const std::string& text);

const char* subcommand_name(ExperimentMode mode);
const char* csv_filename(ExperimentMode mode);

std::string render_csv(const ExperimentReport& report);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(std::istream& in);
std::string render_csv(const CsvTable& table);

std::string render_config_json(const ExperimentConfig& cfg);

// timestamp_utc is the only non-reproducible field in the sidecar.
std::string render_meta_json(const ExperimentReport& report,
                             const std::string& timestamp_utc);

// Writes the figure CSV and meta.json sidecar; returns the written paths.
// CSV bytes depend only on the report contents.
std::vector<std::string> emit_report(const ExperimentReport& report,
                                     const std::string& out_dir);

}  // namespace icmbayes
