#pragma once

#include <cstdint>

#include "ulacert/common.hpp"

namespace ulacert {

// Counter-based Gaussian noise source. Every draw is a pure function of
// (seed, stream, step, counter), so ensembles partitioned across any number
// of workers produce bit-identical streams.
namespace rng {

inline uint64_t mix64(uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

// The (seed, stream, step) part of the key is hashed once and reused across
// the counter dimension, which keeps the hot loops cheap without changing the
// produced stream.
inline uint64_t stream_prefix(uint64_t seed, uint64_t stream) {
  uint64_t h = mix64(seed ^ 0x9e3779b97f4a7c15ULL);
  return mix64(h ^ (0xbf58476d1ce4e5b9ULL * (stream + 1)));
}

inline uint64_t step_prefix(uint64_t stream_prefix, uint64_t step) {
  return mix64(stream_prefix ^ (0x94d049bb133111ebULL * (step + 1)));
}

inline uint64_t key_prefix(uint64_t seed, uint64_t stream, uint64_t step) {
  return step_prefix(stream_prefix(seed, stream), step);
}

inline uint64_t key_at(uint64_t prefix, uint64_t ctr) {
  return mix64(prefix ^ (0x2545f4914f6cdd1dULL * (ctr + 1)));
}

inline uint64_t key(uint64_t seed, uint64_t stream, uint64_t step, uint64_t ctr) {
  return key_at(key_prefix(seed, stream, step), ctr);
}

// uniform in (0,1]; the +1 keeps log() well-defined.
inline double to_unit(uint64_t u) {
  return (static_cast<double>(u >> 11) + 1.0) * 0x1.0p-53;
}

// Marsaglia polar method. The rejection loop indexes its attempts into the
// counter space, so consumption stays a pure function of the key.
inline void normal_pair_at(uint64_t prefix, uint64_t pair_idx, double& z0, double& z1) {
  const uint64_t base = pair_idx * 256;
  for (uint64_t attempt = 0; attempt < 128; ++attempt) {
    const double u = 2.0 * to_unit(key_at(prefix, base + 2 * attempt)) - 1.0;
    const double v = 2.0 * to_unit(key_at(prefix, base + 2 * attempt + 1)) - 1.0;
    const double s = u * u + v * v;
    if (s >= 1.0 || s == 0.0) continue;
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    z0 = u * f;
    z1 = v * f;
    return;
  }
  throw NumericError("rng: rejection sampler failed to accept in 128 attempts");
}

inline void normal_pair(uint64_t seed, uint64_t stream, uint64_t step, uint64_t pair_idx,
                        double& z0, double& z1) {
  normal_pair_at(key_prefix(seed, stream, step), pair_idx, z0, z1);
}

inline void fill_normal_at(uint64_t prefix, double* z, int n) {
  double z0, z1;
  int i = 0;
  for (; i + 1 < n; i += 2) {
    normal_pair_at(prefix, static_cast<uint64_t>(i / 2), z0, z1);
    z[i] = z0;
    z[i + 1] = z1;
  }
  if (i < n) {
    normal_pair_at(prefix, static_cast<uint64_t>(i / 2), z0, z1);
    z[i] = z0;
  }
}

inline void fill_normal(uint64_t seed, uint64_t stream, uint64_t step, double* z, int n) {
  fill_normal_at(key_prefix(seed, stream, step), z, n);
}

inline double uniform(uint64_t seed, uint64_t stream, uint64_t step, uint64_t ctr) {
  return to_unit(key(seed, stream, step, ctr));
}

}  // namespace rng
}  // namespace ulacert
