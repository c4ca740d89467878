#include "bosewell/run.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <utility>

#include <unistd.h>

#include "bosewell/analysis.hpp"
#include "bosewell/cache.hpp"
#include "bosewell/dynamics.hpp"
#include "bosewell/eigensolve.hpp"
#include "bosewell/model.hpp"
#include "bosewell/parallel.hpp"
#include "json.hpp"

namespace bosewell {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Output {
  json metadata = json::object();
  Table table;
  json extras = json::object();  // scalars for JSON output and the sweep sidecar
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::string metadata_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

std::string render_csv(const Output& out) {
  std::ostringstream s;
  for (const auto& [key, value] : out.metadata.items()) {
    s << "# " << key << ": " << metadata_value(value) << "\n";
  }
  for (const auto& [key, value] : out.extras.items()) {
    s << "# " << key << ": " << metadata_value(value) << "\n";
  }
  s << "# timestamp: " << utc_timestamp() << "\n";
  for (std::size_t c = 0; c < out.table.columns.size(); ++c) {
    s << (c ? "," : "") << out.table.columns[c];
  }
  s << "\n";
  for (const auto& row : out.table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) s << (c ? "," : "") << format_double(row[c]);
    s << "\n";
  }
  return s.str();
}

json with_timestamp(const json& metadata) {
  json m = metadata;
  m["timestamp"] = utc_timestamp();
  return m;
}

std::string render_json(const Output& out, bool include_table) {
  json doc;
  doc["metadata"] = with_timestamp(out.metadata);
  for (const auto& [key, value] : out.extras.items()) doc[key] = value;
  if (include_table) {
    doc["columns"] = out.table.columns;
    json rows = json::array();
    for (const auto& row : out.table.rows) {
      json r = json::array();
      for (double v : row) r.push_back(json_number(v));
      rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
  }
  return doc.dump(2) + "\n";
}

// Writes every (path, content) pair or none of them.
void write_all(const std::vector<std::pair<std::string, std::string>>& files) {
  std::vector<std::pair<fs::path, fs::path>> staged;
  auto discard = [&] {
    std::error_code ec;
    for (const auto& [tmp, target] : staged) fs::remove(tmp, ec);
  };
  for (const auto& [path, content] : files) {
    if (path == "-") {
      std::cout << content << std::flush;
      continue;
    }
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".partial." + std::to_string(::getpid());
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      discard();
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    staged.emplace_back(tmp, target);
    out << content;
    out.close();
    if (!out) {
      discard();
      throw IoError("write failed for " + target.string());
    }
  }
  for (const auto& [tmp, target] : staged) {
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
      discard();
      throw IoError("cannot rename into " + target.string() + ": " + ec.message());
    }
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error("internal check failed: " + what);
}

struct Context {
  const RunConfig& config;
  std::ostream& log;
  fs::path cache_dir;
  unsigned threads;

  ModelParams params(double delta_over_u = 0.0) const {
    return make_params(config.n_particles, config.j_over_u, 1.0, delta_over_u);
  }

  Spectrum spectrum(double delta_over_u) const {
    const ModelParams p = params(delta_over_u);
    const CacheKey key{config.n_particles, config.j_over_u, delta_over_u};
    Spectrum s = cached_spectrum(
        cache_dir, key, [&] { return eigh_tridiagonal(build_hamiltonian(p)); }, log);
    check_trace(build_hamiltonian(p), s);
    return s;
  }

  static void check_trace(const TridiagonalMatrix& h, const Spectrum& s) {
    double trace = 0.0;
    double sum = 0.0;
    double scale = 0.0;
    for (double d : h.diag) trace += d;
    for (double e : s.values) {
      sum += e;
      scale += std::abs(e);
    }
    require(std::abs(trace - sum) <= 1e-12 * std::max(scale, 1.0),
            "eigenvalue sum does not reproduce the trace");
  }

  json base_metadata() const {
    json m;
    m["program"] = "bosewell";
    m["version"] = kVersion;
    m["solver"] = kSolverVersion;
    m["command"] = std::string(to_string(config.command));
    m["particles"] = config.n_particles;
    m["j_over_u"] = config.j_over_u;
    if (config.delta_over_u) m["delta_over_u"] = *config.delta_over_u;
    if (config.z0) m["z0"] = *config.z0;
    return m;
  }
};

Output run_spectrum(const Context& ctx) {
  const double delta = ctx.config.delta_over_u.value_or(0.0);
  const Spectrum s = ctx.spectrum(delta);
  Output out;
  out.metadata = ctx.base_metadata();
  out.table.columns = {"m", "energy_over_u"};
  for (std::size_t m = 0; m < s.dim(); ++m) {
    out.table.rows.push_back({static_cast<double>(m), s.values[m]});
  }
  return out;
}

Output run_occupation(const Context& ctx) {
  const GridSpec grid = ctx.config.z0_grid.value_or(default_grid(Command::occupation));
  const std::vector<double> z0s = grid.values();
  const ModelParams p = ctx.params();
  const Spectrum s = ctx.spectrum(0.0);
  std::vector<std::vector<double>> rows(z0s.size());
  parallel_for(z0s.size(), ctx.threads, [&](std::size_t i) {
    const InitialState state = prepare_initial(z0s[i], p, s);
    std::vector<double> row(state.coeffs.size());
    double total = 0.0;
    for (std::size_t m = 0; m < row.size(); ++m) {
      row[m] = state.coeffs[m] * state.coeffs[m];
      total += row[m];
    }
    require(std::abs(total - 1.0) <= 1e-10, "occupation row does not sum to 1");
    rows[i] = std::move(row);
  });

  Output out;
  out.metadata = ctx.base_metadata();
  out.metadata["z0_grid"] = format_double(grid.start) + ":" + format_double(grid.stop) + ":" +
                            format_double(grid.step);
  out.table.columns = {"z0", "m", "probability"};
  for (std::size_t i = 0; i < z0s.size(); ++i) {
    for (std::size_t m = 0; m < rows[i].size(); ++m) {
      out.table.rows.push_back({z0s[i], static_cast<double>(m), rows[i][m]});
    }
  }
  return out;
}

Output run_evolve(const Context& ctx) {
  const RunConfig& cfg = ctx.config;
  const ModelParams p = ctx.params();
  const Spectrum s = ctx.spectrum(0.0);
  const InitialState state = cfg.z0 ? prepare_initial(*cfg.z0, p, s)
                                    : prepare_with_delta(*cfg.delta_over_u, p, s);
  const double omega_p = plasma_frequency(p);
  const double period = 2.0 * std::numbers::pi / omega_p;
  const std::vector<double> times = time_grid(period, cfg.window_periods, cfg.samples_per_period);
  const ImbalanceTrace trace = evolve_imbalance(state, s, times, ctx.threads);

  for (double z : trace.z) require(std::abs(z) <= 1.0 + 1e-12, "|z(t)| exceeds 1");
  require(std::abs(trace.z.front() - state.z0) <= 1e-10, "z(0) differs from prepared z0");

  Output out;
  out.metadata = ctx.base_metadata();
  out.metadata["window_periods"] = cfg.window_periods;
  out.metadata["samples_per_period"] = cfg.samples_per_period;
  out.extras["lambda"] = *lambda(p);
  out.extras["omega_p"] = omega_p;
  out.extras["delta_used"] = state.delta_used;
  out.extras["z0_prepared"] = state.z0;
  if (state.z0 != 0.0) {
    out.extras["zbar_over_z0"] = window_average(state, s, times.back()) / state.z0;
  }
  out.table.columns = {"t", "z"};
  for (std::size_t i = 0; i < times.size(); ++i) out.table.rows.push_back({times[i], trace.z[i]});
  return out;
}

Output run_sweep(const Context& ctx) {
  const RunConfig& cfg = ctx.config;
  const GridSpec grid = cfg.z0_grid.value_or(default_grid(Command::sweep));
  const std::vector<double> z0s = grid.values();
  const ModelParams p = ctx.params();
  const Spectrum s = ctx.spectrum(0.0);
  SweepOptions options;
  options.window_periods = cfg.window_periods;
  options.zc_threshold = cfg.zc_threshold;
  options.threads = ctx.threads;
  const SweepResult result = sweep_zc(p, s, z0s, options);
  for (double r : result.zbar_over_z0) {
    require(r >= -1.01 && r <= 1.01, "zbar/z0 outside [-1.01, 1.01]");
  }
  const CriticalImbalance semiclassical = semiclassical_zc(result.lambda);

  Output out;
  out.metadata = ctx.base_metadata();
  out.metadata["z0_grid"] = format_double(grid.start) + ":" + format_double(grid.stop) + ":" +
                            format_double(grid.step);
  out.metadata["window_periods"] = cfg.window_periods;
  out.metadata["zc_threshold"] = cfg.zc_threshold;
  out.extras["lambda"] = result.lambda;
  out.extras["z_c_found"] = result.found;
  out.extras["z_c_estimate"] = json_number(result.z_c_estimate);
  out.extras["z_c_semiclassical"] = semiclassical.z_c;
  out.extras["no_trapping_regime"] = semiclassical.no_trapping;
  out.table.columns = {"z0", "zbar_over_z0"};
  for (std::size_t i = 0; i < z0s.size(); ++i) {
    out.table.rows.push_back({z0s[i], result.zbar_over_z0[i]});
  }
  return out;
}

Output run_doublets(const Context& ctx) {
  const double delta = ctx.config.delta_over_u.value_or(0.0);
  const Spectrum s = ctx.spectrum(delta);
  const DoubletReport report = classify_spectrum(s, ctx.config.doublet_threshold);

  Output out;
  out.metadata = ctx.base_metadata();
  out.metadata["doublet_threshold"] = ctx.config.doublet_threshold;
  out.extras["separatrix_index"] = report.separatrix_index;
  out.extras["doublet_count"] = report.doublets.size();
  out.extras["irregular"] = report.irregular;
  out.extras["median_gap_over_u"] = report.median_gap;
  if (report.doublets.size() >= 2) {
    out.extras["adjacent_doublet_gap_over_u"] = adjacent_doublet_gap(s, report);
  }
  out.table.columns = {"lower", "upper", "splitting_over_u", "gap_to_next_over_u"};
  for (const auto& d : report.doublets) {
    out.table.rows.push_back({static_cast<double>(d.lower), static_cast<double>(d.upper),
                              d.splitting, d.gap_to_next});
  }
  return out;
}

Output run_report(const Context& ctx) {
  const ModelParams p = ctx.params();
  const double lam = *lambda(p);
  const double omega_p = plasma_frequency(p);
  const CriticalImbalance zc = semiclassical_zc(lam);

  Output out;
  out.metadata = ctx.base_metadata();
  out.extras["lambda"] = lam;
  out.extras["omega_p"] = omega_p;
  out.extras["plasma_period"] = 2.0 * std::numbers::pi / omega_p;
  out.extras["z_c_semiclassical"] = zc.z_c;
  out.extras["no_trapping_regime"] = zc.no_trapping;
  if (ctx.config.n_particles >= 2) {
    const DoubletSplitting split = analytic_doublet_splitting(p.n_particles, p.j);
    out.extras["doublet_splitting_log"] = split.log_value;
    out.extras["doublet_splitting_log10"] = split.log10_value;
    out.extras["doublet_splitting"] = split.value;
  } else {
    out.extras["doublet_splitting_log"] = nullptr;
    out.extras["doublet_splitting_log10"] = nullptr;
    out.extras["doublet_splitting"] = nullptr;
  }
  out.extras["adjacent_doublet_gap_estimate"] = p.n_particles - 1;
  return out;
}

bool needs_grid(Command c) { return c == Command::occupation || c == Command::sweep; }

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  if (name == "spectrum") return Command::spectrum;
  if (name == "occupation") return Command::occupation;
  if (name == "evolve") return Command::evolve;
  if (name == "sweep") return Command::sweep;
  if (name == "doublets") return Command::doublets;
  if (name == "report") return Command::report;
  return std::nullopt;
}

std::string_view to_string(Command command) {
  switch (command) {
    case Command::spectrum: return "spectrum";
    case Command::occupation: return "occupation";
    case Command::evolve: return "evolve";
    case Command::sweep: return "sweep";
    case Command::doublets: return "doublets";
    case Command::report: return "report";
  }
  return "unknown";
}

std::optional<Format> parse_format(std::string_view name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  return std::nullopt;
}

std::vector<double> GridSpec::values() const {
  if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop) || !(stop >= start)) {
    throw std::invalid_argument("grid: need finite start <= stop and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    // Drop the accumulated rounding so 0.05 + 26 * 0.02 reads back as 0.57.
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", start + static_cast<double>(i) * step);
    v[i] = std::strtod(buf, nullptr);
  }
  return v;
}

GridSpec parse_grid(std::string_view text) {
  double parts[3];
  std::size_t begin = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t end = i < 2 ? text.find(':', begin) : text.size();
    if (end == std::string_view::npos) {
      throw std::invalid_argument("grid spec must be start:stop:step, got '" +
                                  std::string(text) + "'");
    }
    const auto field = text.substr(begin, end - begin);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), parts[i]);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
      throw std::invalid_argument("grid spec: cannot parse '" + std::string(field) + "'");
    }
    begin = end + 1;
  }
  GridSpec g{parts[0], parts[1], parts[2]};
  g.values();
  return g;
}

GridSpec default_grid(Command command) {
  if (command == Command::occupation) return {0.0, 0.98, 0.02};
  return {0.05, 0.95, 0.02};
}

std::string sidecar_path(const std::string& output_path) {
  fs::path p(output_path);
  p.replace_extension(".zc.json");
  return p.string();
}

void validate(const RunConfig& config) {
  const auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (config.n_particles < 1) fail("--particles must be >= 1");
  if (!std::isfinite(config.j_over_u) || config.j_over_u < 0.0) fail("--j-over-u must be >= 0");
  const Command c = config.command;
  const bool needs_omega = c == Command::evolve || c == Command::sweep || c == Command::report;
  if (needs_omega && !(config.j_over_u > 0.0)) {
    fail(std::string(to_string(c)) + " needs --j-over-u > 0 (plasma frequency)");
  }
  if (c == Command::evolve) {
    if (config.z0.has_value() == config.delta_over_u.has_value()) {
      fail("evolve needs exactly one of --z0 and --delta-over-u");
    }
  } else if (config.z0) {
    fail(std::string(to_string(c)) + " does not take --z0");
  }
  if ((needs_grid(c) || c == Command::report) && config.delta_over_u) {
    fail(std::string(to_string(c)) + " does not take --delta-over-u");
  }
  if (config.z0_grid && !needs_grid(c)) {
    fail(std::string(to_string(c)) + " does not take --z0-grid");
  }
  if (config.z0_grid) config.z0_grid->values();
  if (config.z0 && !(std::abs(*config.z0) < 1.0)) fail("--z0 must lie in (-1, 1)");
  if (config.delta_over_u && !std::isfinite(*config.delta_over_u)) {
    fail("--delta-over-u must be finite");
  }
  if (!(config.window_periods > 0.0)) fail("--window-periods must be > 0");
  if (config.samples_per_period < 1) fail("--samples-per-period must be >= 1");
  if (!(config.doublet_threshold > 0.0)) fail("--doublet-threshold must be > 0");
  if (!(config.zc_threshold > 0.0)) fail("--zc-threshold must be > 0");
  if (config.output_path.empty()) fail("--out must not be empty");
  if (config.j_over_u == 0.0 && config.delta_over_u.value_or(0.0) == 0.0) {
    fail("J/U = 0 with delta = 0 is a degenerate model");
  }
}

void run(const RunConfig& config, std::ostream& log) {
  validate(config);
  fs::path cache_dir = config.cache_dir;
  if (cache_dir.empty()) {
    if (const char* env = std::getenv("BOSEWELL_CACHE"); env && *env) cache_dir = env;
  }
  const Context ctx{config, log, cache_dir, config.threads ? config.threads : default_threads()};

  Output out;
  switch (config.command) {
    case Command::spectrum: out = run_spectrum(ctx); break;
    case Command::occupation: out = run_occupation(ctx); break;
    case Command::evolve: out = run_evolve(ctx); break;
    case Command::sweep: out = run_sweep(ctx); break;
    case Command::doublets: out = run_doublets(ctx); break;
    case Command::report: out = run_report(ctx); break;
  }

  std::vector<std::pair<std::string, std::string>> files;
  if (config.command == Command::report || config.format == Format::json) {
    files.emplace_back(config.output_path,
                       render_json(out, config.command != Command::report));
  } else {
    files.emplace_back(config.output_path, render_csv(out));
    if (config.command == Command::sweep && config.output_path != "-") {
      files.emplace_back(sidecar_path(config.output_path), render_json(out, false));
    }
  }
  write_all(files);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

}  // namespace bosewell
