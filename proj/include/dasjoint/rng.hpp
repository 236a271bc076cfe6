#ifndef DASJOINT_RNG_HPP_
#define DASJOINT_RNG_HPP_

#include <array>
#include <cstdint>
#include <initializer_list>

namespace dasjoint {

// Counter-free splittable RNG: a xoshiro256++ engine whose state is seeded
// by hashing (root seed, stream path). Every sampling site gets its own
// stream, so inserting or removing a consumer at one site never shifts the
// draws seen by another.
class RngStream {
 public:
  RngStream() : RngStream(0, {}) {}
  RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1).
  double uniform();

  // Standard normal via the inverse CDF, so a draw consumes exactly one
  // uniform regardless of its value.
  double normal();

  // Gamma(shape, scale=1), Marsaglia-Tsang; valid for any shape > 0.
  double gamma(double shape);

  // InverseGamma(shape, rate): 1/X with X ~ Gamma(shape, scale=1/rate).
  double inverse_gamma(double shape, double rate);

 private:
  std::array<std::uint64_t, 4> state_;
};

}  // namespace dasjoint

#endif  // DASJOINT_RNG_HPP_
