// Command-line front end. Parses flags, fills a bw_config through the C API
// and runs it.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bosewell/bosewell.h"

namespace {

struct Flags {
  int particles = 100;
  double j_over_u = 3.333;
  std::optional<double> delta_over_u;
  std::optional<double> z0;
  std::string z0_grid;
  double window_periods = 50.0;
  int samples_per_period = 256;
  std::string out = "-";
  std::string format = "csv";
  std::string cache_dir;
  unsigned threads = 0;
  double doublet_threshold = 1e-3;
  double zc_threshold = 0.1;
};

void add_model_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--particles", f.particles, "Number of bosons N")->capture_default_str();
  cmd->add_option("--j-over-u", f.j_over_u, "Tunneling over interaction J/U")
      ->capture_default_str();
  cmd->add_option("--out", f.out, "Output path, '-' for stdout")->capture_default_str();
  cmd->add_option("--format", f.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--cache-dir", f.cache_dir,
                  "Spectrum cache directory (default: $BOSEWELL_CACHE, else no cache)");
  cmd->add_option("--threads", f.threads, "Worker threads, 0 = all cores")
      ->capture_default_str();
}

int fail_with(const char* what) {
  std::fprintf(stderr, "bosewell: %s\n", what);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact two-mode Bose-Hubbard dynamics in a double well"};
  app.set_version_flag("--version", bw_version());
  app.require_subcommand(1);
  Flags f;

  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues E_m/U");
  add_model_flags(spectrum, f);
  spectrum->add_option("--delta-over-u", f.delta_over_u, "Trap asymmetry delta/U");

  auto* occupation = app.add_subcommand("occupation", "|c_m|^2 versus z(0)");
  add_model_flags(occupation, f);
  occupation->add_option("--z0-grid", f.z0_grid, "start:stop:step (default 0:0.98:0.02)");

  auto* evolve = app.add_subcommand("evolve", "Population imbalance z(t)");
  add_model_flags(evolve, f);
  auto* z0 = evolve->add_option("--z0", f.z0, "Initial imbalance");
  auto* delta = evolve->add_option("--delta-over-u", f.delta_over_u,
                                   "Preparation asymmetry delta/U");
  z0->excludes(delta);
  evolve->add_option("--window-periods", f.window_periods, "Plasma periods to simulate")
      ->capture_default_str();
  evolve->add_option("--samples-per-period", f.samples_per_period, "Time samples per period")
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Time-averaged z/z(0) versus z(0) and z_c");
  add_model_flags(sweep, f);
  sweep->add_option("--z0-grid", f.z0_grid, "start:stop:step (default 0.05:0.95:0.02)");
  sweep->add_option("--window-periods", f.window_periods, "Averaging window in plasma periods")
      ->capture_default_str();
  sweep->add_option("--zc-threshold", f.zc_threshold, "z/z(0) level marking self-trapping")
      ->capture_default_str();

  auto* doublets = app.add_subcommand("doublets", "Quasi-degenerate doublet structure");
  add_model_flags(doublets, f);
  doublets->add_option("--delta-over-u", f.delta_over_u, "Trap asymmetry delta/U");
  doublets->add_option("--doublet-threshold", f.doublet_threshold,
                       "Pair gap threshold relative to the median gap")
      ->capture_default_str();

  auto* report = app.add_subcommand("report", "Closed-form quantities as JSON");
  add_model_flags(report, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help, --version
  } catch (const CLI::ParseError& e) {
    return fail_with(e.what());
  }
  const std::string command = app.get_subcommands().front()->get_name();

  bw_config* raw = nullptr;
  if (bw_config_create(command.c_str(), &raw) != BW_OK) return fail_with(bw_last_error());
  std::unique_ptr<bw_config, decltype(&bw_config_destroy)> config(raw, bw_config_destroy);

  bw_config* c = config.get();
  bw_status st = BW_OK;
  auto apply = [&](bw_status s) {
    if (st == BW_OK) st = s;
  };
  apply(bw_config_set_particles(c, f.particles));
  apply(bw_config_set_j_over_u(c, f.j_over_u));
  if (f.delta_over_u) apply(bw_config_set_delta_over_u(c, *f.delta_over_u));
  if (f.z0) apply(bw_config_set_z0(c, *f.z0));
  if (!f.z0_grid.empty()) apply(bw_config_set_z0_grid_spec(c, f.z0_grid.c_str()));
  apply(bw_config_set_window_periods(c, f.window_periods));
  apply(bw_config_set_samples_per_period(c, f.samples_per_period));
  apply(bw_config_set_output(c, f.out.c_str()));
  apply(bw_config_set_format(c, f.format.c_str()));
  if (!f.cache_dir.empty()) apply(bw_config_set_cache_dir(c, f.cache_dir.c_str()));
  apply(bw_config_set_threads(c, f.threads));
  apply(bw_config_set_doublet_threshold(c, f.doublet_threshold));
  apply(bw_config_set_zc_threshold(c, f.zc_threshold));
  if (st != BW_OK) return fail_with(bw_last_error());

  if (bw_run(c) != BW_OK) return fail_with(bw_last_error());
  return EXIT_SUCCESS;
}
