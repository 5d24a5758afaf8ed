#pragma once

#include <cstdint>

namespace irsim {

/// Deterministic counter-style random stream built on splitmix64.
///
/// Streams are derived from a root seed plus a tag path, so every unit of
/// work (seed, layer, channel, pixel, ...) owns an independent stream whose
/// output does not depend on evaluation order or thread count. All draws are
/// computed from integer mixing only, so results are bit-identical across
/// platforms and stdlib versions.
///
/// Not thread-safe; derive one stream per work item.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : state_(hash_tag(0x8f1bbcdcbfa53e0bULL, seed)) {}

  /// Derive an independent child stream. Same (parent, tag) pair always
  /// yields the same child.
  [[nodiscard]] RngStream child(uint64_t tag) const {
    return RngStream(hash_tag(state_, tag), RawTag{});
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [-1, 1).
  double next_symmetric() { return 2.0 * next_unit() - 1.0; }

  /// Standard normal via Box-Muller; consumes two uniforms per draw.
  double next_normal();

  bool next_bit() { return (next_u64() & 1u) != 0; }

 private:
  struct RawTag {};
  RngStream(uint64_t raw_state, RawTag) : state_(raw_state) {}

  static uint64_t hash_tag(uint64_t state, uint64_t tag) {
    uint64_t z = state ^ (tag + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t state_;
};

/// Stand-alone normal draw keyed by (seed, tags); used for per-cell values
/// that must be addressable without materializing a stream.
double keyed_normal(uint64_t seed, uint64_t tag_a, uint64_t tag_b, uint64_t tag_c);

}  // namespace irsim
