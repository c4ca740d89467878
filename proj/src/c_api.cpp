#include "bosewell/bosewell.h"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <new>
#include <stdexcept>
#include <string>

#include "bosewell/analysis.hpp"
#include "bosewell/dynamics.hpp"
#include "bosewell/eigensolve.hpp"
#include "bosewell/model.hpp"
#include "bosewell/run.hpp"

struct bw_config {
  bosewell::RunConfig config;
};

struct bw_spectrum {
  bosewell::Spectrum spectrum;
};

namespace {

thread_local std::string last_error;

bw_status fail(bw_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Maps the core's exceptions onto status codes.
template <typename Fn>
bw_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return BW_OK;
  } catch (const bosewell::ConvergenceError& e) {
    return fail(BW_ERR_NO_CONVERGENCE, e.what());
  } catch (const bosewell::NoSolutionError& e) {
    return fail(BW_ERR_NO_SOLUTION, e.what());
  } catch (const std::domain_error& e) {
    return fail(BW_ERR_DOMAIN, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(BW_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(BW_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(BW_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(BW_ERR_INTERNAL, "out of memory");
  } catch (const bosewell::IoError& e) {
    return fail(BW_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(BW_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BW_ERR_INTERNAL, "unknown error");
  }
}

// Every entry point starts with at least one of these, which also resets the
// thread's last error.
#define BW_REQUIRE(cond, message) \
  last_error.clear();             \
  if (!(cond)) return fail(BW_ERR_INVALID_ARGUMENT, message)

bosewell::InitialState prepared(int n_particles, double j_over_u, double z0,
                                bosewell::Spectrum& spectrum) {
  const auto params = bosewell::make_params(n_particles, j_over_u, 1.0, 0.0);
  spectrum = bosewell::eigh_tridiagonal(bosewell::build_hamiltonian(params));
  return bosewell::prepare_initial(z0, params, spectrum);
}

}  // namespace

extern "C" {

const char* bw_version(void) { return bosewell::kVersion; }

const char* bw_last_error(void) { return last_error.c_str(); }

bw_status bw_config_create(const char* command, bw_config** out) {
  BW_REQUIRE(out != nullptr, "bw_config_create: null output pointer");
  *out = nullptr;
  BW_REQUIRE(command != nullptr, "bw_config_create: null command");
  const auto parsed = bosewell::parse_command(command);
  if (!parsed) return fail(BW_ERR_INVALID_ARGUMENT, std::string("unknown command '") + command + "'");
  return guarded([&] {
    auto* cfg = new bw_config;
    cfg->config.command = *parsed;
    *out = cfg;
  });
}

void bw_config_destroy(bw_config* config) { delete config; }

#define BW_CONFIG_SETTER(name, type, field)                     \
  bw_status name(bw_config* config, type value) {               \
    BW_REQUIRE(config != nullptr, #name ": null configuration"); \
    config->config.field = value;                               \
    return BW_OK;                                               \
  }

BW_CONFIG_SETTER(bw_config_set_particles, int, n_particles)
BW_CONFIG_SETTER(bw_config_set_j_over_u, double, j_over_u)
BW_CONFIG_SETTER(bw_config_set_delta_over_u, double, delta_over_u)
BW_CONFIG_SETTER(bw_config_set_z0, double, z0)
BW_CONFIG_SETTER(bw_config_set_window_periods, double, window_periods)
BW_CONFIG_SETTER(bw_config_set_samples_per_period, int, samples_per_period)
BW_CONFIG_SETTER(bw_config_set_threads, unsigned, threads)
BW_CONFIG_SETTER(bw_config_set_doublet_threshold, double, doublet_threshold)
BW_CONFIG_SETTER(bw_config_set_zc_threshold, double, zc_threshold)

#undef BW_CONFIG_SETTER

bw_status bw_config_set_z0_grid(bw_config* config, double start, double stop, double step) {
  BW_REQUIRE(config != nullptr, "bw_config_set_z0_grid: null configuration");
  return guarded([&] {
    bosewell::GridSpec grid{start, stop, step};
    grid.values();
    config->config.z0_grid = grid;
  });
}

bw_status bw_config_set_z0_grid_spec(bw_config* config, const char* spec) {
  BW_REQUIRE(config != nullptr && spec != nullptr, "bw_config_set_z0_grid_spec: null argument");
  return guarded([&] { config->config.z0_grid = bosewell::parse_grid(spec); });
}

bw_status bw_config_set_output(bw_config* config, const char* path) {
  BW_REQUIRE(config != nullptr && path != nullptr, "bw_config_set_output: null argument");
  BW_REQUIRE(*path != '\0', "bw_config_set_output: empty path");
  config->config.output_path = path;
  return BW_OK;
}

bw_status bw_config_set_format(bw_config* config, const char* format) {
  BW_REQUIRE(config != nullptr && format != nullptr, "bw_config_set_format: null argument");
  const auto parsed = bosewell::parse_format(format);
  if (!parsed) return fail(BW_ERR_INVALID_ARGUMENT, std::string("unknown format '") + format + "'");
  config->config.format = *parsed;
  return BW_OK;
}

bw_status bw_config_set_cache_dir(bw_config* config, const char* dir) {
  BW_REQUIRE(config != nullptr && dir != nullptr, "bw_config_set_cache_dir: null argument");
  config->config.cache_dir = dir;
  return BW_OK;
}

bw_status bw_config_validate(const bw_config* config) {
  BW_REQUIRE(config != nullptr, "bw_config_validate: null configuration");
  return guarded([&] { bosewell::validate(config->config); });
}

bw_status bw_run(const bw_config* config) {
  BW_REQUIRE(config != nullptr, "bw_run: null configuration");
  return guarded([&] { bosewell::run(config->config, std::cerr); });
}

bw_status bw_spectrum_compute(int n_particles, double j, double u, double delta,
                              bw_spectrum** out) {
  BW_REQUIRE(out != nullptr, "bw_spectrum_compute: null output pointer");
  *out = nullptr;
  return guarded([&] {
    const auto params = bosewell::make_params(n_particles, j, u, delta);
    auto* s = new bw_spectrum{bosewell::eigh_tridiagonal(bosewell::build_hamiltonian(params))};
    *out = s;
  });
}

void bw_spectrum_destroy(bw_spectrum* spectrum) { delete spectrum; }

size_t bw_spectrum_dim(const bw_spectrum* spectrum) {
  return spectrum ? spectrum->spectrum.dim() : 0;
}

bw_status bw_spectrum_values(const bw_spectrum* spectrum, double* out, size_t capacity) {
  BW_REQUIRE(spectrum != nullptr && out != nullptr, "bw_spectrum_values: null argument");
  BW_REQUIRE(capacity >= spectrum->spectrum.dim(), "bw_spectrum_values: buffer too small");
  std::copy(spectrum->spectrum.values.begin(), spectrum->spectrum.values.end(), out);
  return BW_OK;
}

bw_status bw_spectrum_vector(const bw_spectrum* spectrum, size_t m, double* out,
                             size_t capacity) {
  BW_REQUIRE(spectrum != nullptr && out != nullptr, "bw_spectrum_vector: null argument");
  BW_REQUIRE(m < spectrum->spectrum.dim(), "bw_spectrum_vector: eigenindex out of range");
  BW_REQUIRE(capacity >= spectrum->spectrum.dim(), "bw_spectrum_vector: buffer too small");
  const auto v = spectrum->spectrum.vector(m);
  std::copy(v.begin(), v.end(), out);
  return BW_OK;
}

bw_status bw_evolve_imbalance(int n_particles, double j_over_u, double z0, const double* times,
                              size_t count, double* z_out) {
  BW_REQUIRE(count == 0 || (times != nullptr && z_out != nullptr),
             "bw_evolve_imbalance: null buffer");
  return guarded([&] {
    bosewell::Spectrum spectrum;
    const auto state = prepared(n_particles, j_over_u, z0, spectrum);
    const auto trace =
        bosewell::evolve_imbalance(state, spectrum, std::span<const double>(times, count));
    std::copy(trace.z.begin(), trace.z.end(), z_out);
  });
}

bw_status bw_window_average_ratio(int n_particles, double j_over_u, double z0, double window,
                                  double* out) {
  BW_REQUIRE(out != nullptr, "bw_window_average_ratio: null output pointer");
  BW_REQUIRE(z0 != 0.0, "bw_window_average_ratio: z0 must be nonzero");
  return guarded([&] {
    bosewell::Spectrum spectrum;
    const auto state = prepared(n_particles, j_over_u, z0, spectrum);
    *out = bosewell::window_average(state, spectrum, window) / state.z0;
  });
}

bw_status bw_plasma_frequency(int n_particles, double j, double u, double* out) {
  BW_REQUIRE(out != nullptr, "bw_plasma_frequency: null output pointer");
  return guarded([&] {
    bosewell::ModelParams p{n_particles, j, u, 0.0};
    *out = bosewell::plasma_frequency(p);
  });
}

bw_status bw_doublet_splitting_log10(int n_particles, double j_over_u, double* out) {
  BW_REQUIRE(out != nullptr, "bw_doublet_splitting_log10: null output pointer");
  return guarded(
      [&] { *out = bosewell::analytic_doublet_splitting(n_particles, j_over_u).log10_value; });
}

bw_status bw_semiclassical_zc(double lambda, double* out, int* clipped) {
  BW_REQUIRE(out != nullptr, "bw_semiclassical_zc: null output pointer");
  return guarded([&] {
    const auto zc = bosewell::semiclassical_zc(lambda);
    *out = zc.z_c;
    if (clipped) *clipped = zc.no_trapping ? 1 : 0;
  });
}

}  // extern "C"
