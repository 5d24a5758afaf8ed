#include "irsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace irsim {

double RngStream::next_normal() {
  // u1 in (0, 1] so the log is finite.
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double keyed_normal(uint64_t seed, uint64_t tag_a, uint64_t tag_b, uint64_t tag_c) {
  RngStream s = RngStream(seed).child(tag_a).child(tag_b).child(tag_c);
  return s.next_normal();
}

}  // namespace irsim
