#include "bosewell/cache.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <vector>

#include <unistd.h>

namespace bosewell {

namespace {

constexpr char kMagic[8] = {'B', 'W', 'S', 'P', 'E', 'C', '0', '1'};

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void value(const T& v) {
    bytes(&v, sizeof(T));
  }
};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

std::uint64_t payload_checksum(const Spectrum& s) {
  Fnv1a f;
  f.bytes(s.values.data(), s.values.size() * sizeof(double));
  f.bytes(s.vectors.data(), s.vectors.size() * sizeof(double));
  return f.h;
}

}  // namespace

std::string CacheKey::digest() const {
  Fnv1a f;
  f.value(static_cast<std::int64_t>(n_particles));
  // Bit patterns, so that -0.0 and 0.0 or nearby doubles never collide by formatting.
  f.value(std::bit_cast<std::uint64_t>(j_over_u));
  f.value(std::bit_cast<std::uint64_t>(delta_over_u));
  f.bytes(solver_version.data(), solver_version.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f.h));
  return buf;
}

std::filesystem::path cache_file(const std::filesystem::path& dir, const CacheKey& key) {
  return dir / ("spectrum-" + key.digest() + ".bin");
}

void cache_spectrum(const std::filesystem::path& dir, const CacheKey& key,
                    const Spectrum& spectrum) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cache: cannot create directory " + dir.string() + ": " +
                             ec.message());
  }
  const auto target = cache_file(dir, key);
  auto tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cache: cannot write " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    put(out, static_cast<std::uint32_t>(key.solver_version.size()));
    out.write(key.solver_version.data(),
              static_cast<std::streamsize>(key.solver_version.size()));
    put(out, static_cast<std::int64_t>(key.n_particles));
    put(out, key.j_over_u);
    put(out, key.delta_over_u);
    put(out, static_cast<std::uint64_t>(spectrum.dim()));
    out.write(reinterpret_cast<const char*>(spectrum.values.data()),
              static_cast<std::streamsize>(spectrum.values.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(spectrum.vectors.data()),
              static_cast<std::streamsize>(spectrum.vectors.size() * sizeof(double)));
    put(out, payload_checksum(spectrum));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("cache: write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cache: cannot rename into " + target.string());
  }
}

std::optional<Spectrum> load_spectrum(const std::filesystem::path& dir, const CacheKey& key,
                                      std::ostream& warnings) {
  const auto path = cache_file(dir, key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;

  auto corrupt = [&](const char* why) -> std::optional<Spectrum> {
    warnings << "warning: ignoring cache entry " << path.string() << " (" << why
             << "), recomputing\n";
    return std::nullopt;
  };

  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kMagic)) {
    return corrupt("bad header");
  }
  std::uint32_t version_len = 0;
  if (!get(in, version_len) || version_len > 256) return corrupt("bad header");
  std::string version(version_len, '\0');
  if (!in.read(version.data(), version_len)) return corrupt("truncated");
  if (version != key.solver_version) return corrupt("solver version mismatch");
  std::int64_t n = 0;
  double j = 0.0;
  double delta = 0.0;
  std::uint64_t dim = 0;
  if (!get(in, n) || !get(in, j) || !get(in, delta) || !get(in, dim)) {
    return corrupt("truncated");
  }
  if (n != key.n_particles || std::bit_cast<std::uint64_t>(j) !=
                                  std::bit_cast<std::uint64_t>(key.j_over_u) ||
      std::bit_cast<std::uint64_t>(delta) != std::bit_cast<std::uint64_t>(key.delta_over_u)) {
    return corrupt("parameter mismatch");
  }
  if (dim != static_cast<std::uint64_t>(key.n_particles) + 1) return corrupt("bad dimension");

  Spectrum s;
  s.values.resize(dim);
  s.vectors.resize(dim * dim);
  if (!in.read(reinterpret_cast<char*>(s.values.data()),
               static_cast<std::streamsize>(dim * sizeof(double))) ||
      !in.read(reinterpret_cast<char*>(s.vectors.data()),
               static_cast<std::streamsize>(dim * dim * sizeof(double)))) {
    return corrupt("truncated");
  }
  std::uint64_t checksum = 0;
  if (!get(in, checksum) || checksum != payload_checksum(s)) return corrupt("checksum mismatch");
  if (in.peek() != std::char_traits<char>::eof()) return corrupt("trailing bytes");
  return s;
}

Spectrum cached_spectrum(const std::filesystem::path& dir, const CacheKey& key,
                         const std::function<Spectrum()>& compute, std::ostream& warnings) {
  if (dir.empty()) return compute();
  if (auto hit = load_spectrum(dir, key, warnings)) return std::move(*hit);
  Spectrum s = compute();
  try {
    cache_spectrum(dir, key, s);
  } catch (const std::exception& e) {
    warnings << "warning: " << e.what() << "\n";
  }
  return s;
}

}  // namespace bosewell
