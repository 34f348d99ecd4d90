#pragma once

#include <cstdint>
#include <random>

namespace flowes {

/// Named sub-streams derived from one master seed. Keeping population noise,
/// KL-estimation noise and initialization noise on independent streams means
/// that enabling or disabling one consumer (e.g. the coupling-layer update)
/// cannot shift the samples seen by another.
enum class Stream : std::uint64_t {
  objective_setup = 1,
  latent_init = 2,
  flow_init = 3,
  population = 4,
  kl = 5,
};

inline std::mt19937_64 make_stream(std::uint64_t seed, Stream id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

/// Uniform in [0, 1). 53-bit resolution.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Standard normal draw via Box-Muller. Stateless (no cached spare), so the
/// mapping from raw engine output to the sample stream is fixed and
/// reproducible regardless of call sites.
inline double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace flowes
