#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mdslab {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// JSON experiment description. Keys: command, space, sizes, m, p, tol,
/// seed, out, plus `options`, an object of further long flags passed
/// verbatim (e.g. {"input": "tri.csv"}). Absent keys stay absent on output.
struct ExperimentConfig {
  std::string command;  ///< e.g. "mds embed"
  std::optional<std::string> space;
  std::vector<std::size_t> sizes;
  std::optional<std::size_t> m;
  std::optional<double> p;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  nlohmann::ordered_json options = nlohmann::ordered_json::object();

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ParseError on malformed JSON, wrong types or unknown keys.
ExperimentConfig parse_config(std::string_view json_text);
std::string format_config(const ExperimentConfig& config);
/// Command words followed by long flags, ready for run().
std::vector<std::string> config_to_args(const ExperimentConfig& config);

struct RunRecord {
  std::string command;
  std::string config_hash;  ///< FNV-1a 64 of the canonical argument JSON, hex
  std::string tool_version;
  double wall_time_s = 0.0;
  std::string result;       ///< path of the result table

  nlohmann::ordered_json to_json() const;
};

/// FNV-1a 64-bit hash, 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

struct Claim {
  std::string_view command;
  std::string_view claim;
};

/// What each subcommand demonstrates.
std::span<const Claim> claim_registry();
std::span<const std::string_view> subcommands();

/// Runs one command; `args` excludes the program name. Exit codes: 0 success,
/// 2 bad input (validation, parse, IO, unknown command), 3 numerical failure,
/// 1 anything else.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mdslab
