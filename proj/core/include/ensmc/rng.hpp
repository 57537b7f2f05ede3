#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace ensmc {

// Counter-based pseudorandom stream (splitmix64).
//
// The generator state is a 64-bit counter advanced by the golden-ratio
// increment 0x9E3779B97F4A7C15; each output is a bijective mix of the
// counter (Vigna's splitmix64 finalizer, constants 0xBF58476D1CE4E5B9 and
// 0x94D049BB133111EB).  For stream 0 the counter starts at the raw seed,
// reproducing the reference splitmix64 sequence; stream s starts at
// seed + mix(s), which places distinct streams ~2^63 counter steps apart
// with overwhelming probability.
//
// Integer draws are bit-identical everywhere.  uniform() derives doubles
// from the top 53 bits, so uniform/normal sequences are bit-identical for
// a given (seed, stream) on any IEEE-754 platform with the same libm
// (normal() additionally involves log/exp/erfc).
class RngStream {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64";

  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  // i uniform on {0, ..., n-1}; single draw (fixed consumption), via the
  // 128-bit multiply-shift reduction.  n must be >= 1.
  std::uint64_t uniform_below(std::uint64_t n);

  double uniform();      // [0, 1), 53-bit resolution
  double uniform_pos();  // (0, 1)
  double uniform(double lo, double hi);

  // Standard normal by inversion of the CDF; consumes exactly one draw.
  double normal();
  double normal(double mean, double sd);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t draws() const { return draws_; }

 private:
  std::uint64_t counter_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t draws_ = 0;
};

// Inverse standard-normal CDF, p in (0, 1).
//
// Initial guess from the Abramowitz & Stegun 26.2.23 rational approximation
// (|error| < 4.5e-4), polished with three Newton steps on Phi(x) - p using
// erfc for tail-accurate Phi.  Relative accuracy near machine precision over
// the full open interval.
double normal_icdf(double p);

}  // namespace ensmc
