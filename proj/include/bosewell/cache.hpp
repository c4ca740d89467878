#pragma once

// On-disk spectrum cache. Entries are keyed by a digest of the model
// parameters and the solver version, written atomically (temp file, then
// rename) and verified by checksum on load.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "bosewell/spectrum.hpp"

namespace bosewell {

inline constexpr const char* kSolverVersion = "ql-wilkinson/1";

struct CacheKey {
  int n_particles = 0;
  double j_over_u = 0.0;
  double delta_over_u = 0.0;
  std::string solver_version = kSolverVersion;

  /// 16 hex digits; equal keys give equal digests.
  std::string digest() const;
};

std::filesystem::path cache_file(const std::filesystem::path& dir, const CacheKey& key);

/// Throws std::runtime_error if the directory cannot be created or written.
void cache_spectrum(const std::filesystem::path& dir, const CacheKey& key,
                    const Spectrum& spectrum);

/// Empty on a miss. A corrupt or mismatched file is reported on `warnings`
/// and treated as a miss.
std::optional<Spectrum> load_spectrum(const std::filesystem::path& dir, const CacheKey& key,
                                      std::ostream& warnings);

/// Load from the cache, or compute and store. An empty dir disables caching.
Spectrum cached_spectrum(const std::filesystem::path& dir, const CacheKey& key,
                         const std::function<Spectrum()>& compute, std::ostream& warnings);

}  // namespace bosewell
