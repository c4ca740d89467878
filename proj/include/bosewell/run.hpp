#pragma once

// Orchestration behind the command-line front end: one RunConfig in, one or
// two self-describing data files out.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bosewell {

inline constexpr const char* kVersion = "1.0.0";

/// Output files could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { spectrum, occupation, evolve, sweep, doublets, report };
enum class Format { csv, json };

std::optional<Command> parse_command(std::string_view name);
std::string_view to_string(Command command);
std::optional<Format> parse_format(std::string_view name);

/// Inclusive grid start, start+step, ..., up to stop (within 1e-9 step).
struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;

  std::vector<double> values() const;
};

/// Parses "start:stop:step".
GridSpec parse_grid(std::string_view text);

struct RunConfig {
  Command command = Command::report;
  int n_particles = 100;
  double j_over_u = 3.333;
  std::optional<double> delta_over_u;
  std::optional<double> z0;
  std::optional<GridSpec> z0_grid;
  double window_periods = 50.0;
  int samples_per_period = 256;
  std::string output_path = "-";  ///< "-" is standard output
  Format format = Format::csv;
  std::string cache_dir;          ///< empty: BOSEWELL_CACHE, else no cache
  unsigned threads = 0;           ///< 0: available parallelism
  double doublet_threshold = 1e-3;
  double zc_threshold = 0.1;
};

/// Throws std::invalid_argument describing the first problem found.
void validate(const RunConfig& config);

/// Default z0 grid per command (occupation and sweep).
GridSpec default_grid(Command command);

/// Path of the JSON sidecar written next to a sweep CSV.
std::string sidecar_path(const std::string& output_path);

/// Runs one command. Files are written to a temporary name and renamed on
/// success; nothing is left behind on failure. Throws on any module error or
/// failed internal consistency check. Warnings go to `log`.
void run(const RunConfig& config, std::ostream& log);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace bosewell
