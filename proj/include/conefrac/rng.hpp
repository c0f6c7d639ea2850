#pragma once

#include <cstdint>

namespace conefrac {

// splitmix64 mixing step; used to derive disjoint substream ids.
std::uint64_t mix64(std::uint64_t x);

// Counter-based stream (Philox4x32-10).  A stream is addressed by
// (seed, stream index); identical (seed, stream, draw count) reproduces the
// identical draw sequence on every run.  Streams are never shared between
// workers; each parallel block derives its own via substream().
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  double uniform();  // open (0,1), 53-bit resolution
  double normal();   // standard normal, Box-Muller (pairs cached)
  // Gamma(shape, scale 1), shape > 0; Marsaglia-Tsang with the
  // power-of-uniform boost for shape < 1.
  double gamma(double shape);
  double chi_square(double df) { return 2.0 * gamma(0.5 * df); }

  // Derived stream with a disjoint counter prefix; deterministic in i.
  RngStream substream(std::uint64_t i) const;

 private:
  void refill();

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
  std::uint32_t buf_[4] = {0, 0, 0, 0};
  int buf_pos_ = 4;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0;
};

}  // namespace conefrac
